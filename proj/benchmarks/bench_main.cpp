// Microbenchmarks for the inner loops of the experiments.

#include <benchmark/benchmark.h>

#include "landloc/hamiltonian.hpp"
#include "landloc/percolation.hpp"
#include "landloc/potential.hpp"
#include "landloc/projector.hpp"
#include "landloc/rng.hpp"

using namespace landloc;
namespace ham = landloc::hamiltonian;
namespace perc = landloc::percolation;
namespace pot = landloc::potential;

static void BM_SampleBonds(benchmark::State& st) {
  const auto ell = st.range(0);
  const auto rect = perc::aspect_rectangle(1, ell);
  std::uint64_t s = 0;
  for (auto _ : st) benchmark::DoNotOptimize(perc::sample_bonds(0.6, rect.box(), ++s));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(rect.box().bond_count()));
}
BENCHMARK(BM_SampleBonds)->Arg(16)->Arg(64);

static void BM_CrossingExists(benchmark::State& st) {
  const auto ell = st.range(0);
  const auto rect = perc::aspect_rectangle(1, ell);
  const auto c = perc::sample_bonds(0.5, rect.box(), 3);
  for (auto _ : st) benchmark::DoNotOptimize(perc::crossing_exists(c, rect));
}
BENCHMARK(BM_CrossingExists)->Arg(16)->Arg(64)->Arg(256);

static void BM_FindCircuit(benchmark::State& st) {
  const auto ell = st.range(0);
  const perc::Annulus a{{0, 0}, ell};
  const auto c = perc::sample_bonds(0.65, a.outer(), 5);
  for (auto _ : st) benchmark::DoNotOptimize(perc::find_closed_circuit(c, a));
}
BENCHMARK(BM_FindCircuit)->Arg(16)->Arg(64);

static void BM_KernelEval(benchmark::State& st) {
  const projector::ProjectorKernel k{static_cast<int>(st.range(0)), 20.0};
  Rng rng(1);
  for (auto _ : st) benchmark::DoNotOptimize(k({rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform()}));
}
BENCHMARK(BM_KernelEval)->Arg(0)->Arg(3);

static void BM_Assemble(benchmark::State& st) {
  const double h = 1.0 / static_cast<double>(st.range(0));
  const Grid g({0.0, 0.0}, 6.0, h);
  pot::CouplingSpec spec;
  const auto bump = pot::SingleSiteBump::with_radius(0.35);
  const auto V = pot::sample_couplings(spec, pot::SiteBox::centered(5), 9, bump);
  for (auto _ : st) benchmark::DoNotOptimize(ham::assemble(20.0, V, g));
  st.counters["sites"] = static_cast<double>(g.size());
}
BENCHMARK(BM_Assemble)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_InertiaCount(benchmark::State& st) {
  const double h = 1.0 / static_cast<double>(st.range(0));
  const auto H = ham::assemble_free(20.0, Grid({0.0, 0.0}, 6.0, h));
  ham::InertiaCounter ic(H.matrix());
  double e = 15.0;
  for (auto _ : st) benchmark::DoNotOptimize(ic.count_below(e += 1e-3));
}
BENCHMARK(BM_InertiaCount)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_EigsWindow(benchmark::State& st) {
  const double B = static_cast<double>(st.range(0));
  const Grid g({0.0, 0.0}, 4.0, 0.1);
  const auto H = ham::assemble_free(B, g);
  for (auto _ : st) benchmark::DoNotOptimize(ham::eigs_window(H, 0.0, 1.5 * B));
}
BENCHMARK(BM_EigsWindow)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_ResolventSolve(benchmark::State& st) {
  const auto H = ham::assemble_free(20.0, Grid({0.0, 0.0}, 6.0, 0.1));
  const ham::ResolventSolver R(H.matrix(), {30.0, 1e-3});
  const Eigen::VectorXcd v = Eigen::VectorXcd::Ones(R.size());
  for (auto _ : st) benchmark::DoNotOptimize(R.solve(v));
}
BENCHMARK(BM_ResolventSolve)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
