// Serial reference kernels against their OpenMP counterparts.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "fseg/kernels.hpp"
#include "fseg/random.hpp"

namespace k = fseg::kernels;

namespace {

k::MatrixF64 random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    fseg::Rng rng(seed);
    k::MatrixF64 m(rows, cols);
    for (double& v : m.data) {
        v = rng.uniform01();
    }
    return m;
}

// A tile of 64x64 pixels with 384 channels at rank 8.
struct Problem {
    std::size_t pixels;
    std::size_t channels = 384;
    std::size_t rank = 8;
    k::MatrixF64 a;
    k::MatrixF64 w;
    k::MatrixF64 h;

    explicit Problem(std::size_t side)
        : pixels(side * side),
          a(random_matrix(pixels, channels, 1)),
          w(random_matrix(pixels, rank, 2)),
          h(random_matrix(rank, channels, 3)) {}
};

template <bool Parallel>
void bm_gemm_abt(benchmark::State& state) {
    const Problem p(static_cast<std::size_t>(state.range(0)));
    k::MatrixF64 aht(p.pixels, p.rank);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::omp::gemm_abt(p.a.view(), p.h.view(), aht);
        } else {
            k::serial::gemm_abt(p.a.view(), p.h.view(), aht);
        }
        benchmark::DoNotOptimize(aht.data.data());
    }
    state.counters["threads"] = Parallel ? omp_get_max_threads() : 1;
}

template <bool Parallel>
void bm_residual(benchmark::State& state) {
    const Problem p(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        const double r = Parallel ? k::omp::residual_sq_norm(p.a.view(), p.w.view(), p.h.view())
                                  : k::serial::residual_sq_norm(p.a.view(), p.w.view(), p.h.view());
        benchmark::DoNotOptimize(r);
    }
}

template <bool Parallel>
void bm_hals_rows(benchmark::State& state) {
    const Problem p(static_cast<std::size_t>(state.range(0)));
    k::MatrixF64 aht(p.pixels, p.rank);
    k::MatrixF64 hht(p.rank, p.rank);
    k::serial::gemm_abt(p.a.view(), p.h.view(), aht);
    k::serial::gemm_abt(p.h.view(), p.h.view(), hht);
    for (auto _ : state) {
        state.PauseTiming();
        k::MatrixF64 w = p.w;
        state.ResumeTiming();
        if constexpr (Parallel) {
            k::omp::hals_update_rows(w, aht.view(), hht.view(), 1e-12, 1);
        } else {
            k::serial::hals_update_rows(w, aht.view(), hht.view(), 1e-12, 1);
        }
        benchmark::DoNotOptimize(w.data.data());
    }
}

template <bool Parallel>
void bm_assign_nearest(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const k::MatrixF64 points = random_matrix(n, 384, 4);
    const k::MatrixF64 centers = random_matrix(16, 384, 5);
    std::vector<std::uint32_t> labels(n);
    for (auto _ : state) {
        auto d = Parallel ? k::omp::assign_nearest(points.view(), centers.view(), labels)
                          : k::serial::assign_nearest(points.view(), centers.view(), labels);
        benchmark::DoNotOptimize(d.data());
    }
}

}  // namespace

BENCHMARK(bm_gemm_abt<false>)->Name("gemm_abt/serial")->Arg(32)->Arg(64)->UseRealTime();
BENCHMARK(bm_gemm_abt<true>)->Name("gemm_abt/omp")->Arg(32)->Arg(64)->UseRealTime();
BENCHMARK(bm_residual<false>)->Name("residual_sq_norm/serial")->Arg(32)->Arg(64)->UseRealTime();
BENCHMARK(bm_residual<true>)->Name("residual_sq_norm/omp")->Arg(32)->Arg(64)->UseRealTime();
BENCHMARK(bm_hals_rows<false>)->Name("hals_update_rows/serial")->Arg(64)->UseRealTime();
BENCHMARK(bm_hals_rows<true>)->Name("hals_update_rows/omp")->Arg(64)->UseRealTime();
BENCHMARK(bm_assign_nearest<false>)->Name("assign_nearest/serial")->Arg(1024)->Arg(8192)->UseRealTime();
BENCHMARK(bm_assign_nearest<true>)->Name("assign_nearest/omp")->Arg(1024)->Arg(8192)->UseRealTime();

BENCHMARK_MAIN();
