// Timing comparison between the serial reference scorer, the optimized
// kernels at one thread, and the OpenMP paths. Accepts optional "n d"
// arguments (defaults 20000 100).

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "odefs/dataset.hpp"
#include "odefs/ensemble.hpp"
#include "odefs/lesinn.hpp"
#include "odefs/parallel.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = Clock::now();
        f();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
    std::size_t d = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 100;

    odefs::SyntheticSpec spec;
    spec.n = n;
    spec.d = d;
    spec.d_relevant = std::max<std::size_t>(1, d / 5);
    spec.seed = 7;
    auto [data, norm] = odefs::minmax_normalize(odefs::generate_synthetic(spec));
    (void)norm;

    auto model = odefs::build_lesinn(data, 50, 8, 7);
    auto w = odefs::FeatureWeights::ones(d);
    const int max_threads = omp_get_max_threads();

    std::cout << "scoring " << n << " objects, d=" << d << ", c=50, subsample=8, threads up to "
              << max_threads << "\n\n";

    double t_ref = time_best_of(3, [&] { odefs::lesinn_score_all_reference(model, data, w); });
    double t_one = time_best_of(3, [&] { odefs::lesinn_score_all(model, data, w, 1); });
    double t_par = time_best_of(3, [&] { odefs::lesinn_score_all(model, data, w, 0); });

    std::cout << "score_all reference (serial)   " << t_ref << " s\n";
    std::cout << "score_all optimized, 1 thread  " << t_one << " s   (" << t_ref / t_one << "x)\n";
    std::cout << "score_all optimized, " << max_threads << " threads "
              << t_par << " s   (" << t_ref / t_par << "x)\n\n";

    odefs::OdefsParams params;
    params.seed = 7;
    params.threads = 1;
    auto t0 = Clock::now();
    auto [scores_serial, model_serial] = odefs::run_odefs(data, params);
    double t_run_one = seconds_since(t0);

    params.threads = 0;
    t0 = Clock::now();
    auto [scores_parallel, model_parallel] = odefs::run_odefs(data, params);
    double t_run_par = seconds_since(t0);

    bool identical = scores_serial == scores_parallel;
    std::cout << "run_odefs, 1 thread            " << t_run_one << " s\n";
    std::cout << "run_odefs, " << max_threads << " threads          " << t_run_par << " s   ("
              << t_run_one / t_run_par << "x, scores identical: " << (identical ? "yes" : "NO")
              << ")\n";
    return identical ? 0 : 1;
}
