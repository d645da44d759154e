#include <random>

#include <benchmark/benchmark.h>

#include "isofdr/isotonic.hpp"

using namespace isofdr;

namespace {

Eigen::VectorXd noisy_decreasing(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 0.3);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = -0.05 * static_cast<double>(i) + noise(rng);
    return v;
}

Eigen::MatrixXd banded_spd(Eigen::Index n) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = 2.0 + 0.01 * static_cast<double>(i);
        if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = -0.5;
    }
    return m;
}

void BM_Pava(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    ChainProblem p{noisy_decreasing(n, rng), Eigen::VectorXd(Eigen::VectorXd::Constant(n, 1.0)), Direction::NonIncreasing};
    for (auto _ : state) benchmark::DoNotOptimize(pava(p));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Pava)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_QpIsotonic(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    ChainProblem p{noisy_decreasing(n, rng), banded_spd(n), Direction::NonIncreasing};
    for (auto _ : state) benchmark::DoNotOptimize(qp_isotonic(p));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_QpIsotonic)->RangeMultiplier(2)->Range(16, 256)->Complexity();

}  // namespace
