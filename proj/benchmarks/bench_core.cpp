#include "qwork/hilbert.hpp"
#include "qwork/krylov.hpp"
#include "qwork/model.hpp"
#include "qwork/propagate.hpp"

#include <benchmark/benchmark.h>

#include <memory>

namespace {

using namespace qwork;

SystemModel trimer() { return SystemModel(ModelParams::from_u(3, 4, 1.2)); }

CompositeHamiltonian composite(const SystemModel& model, int n_max) {
  const AgentBasis basis(n_max, 0.02, 0.1);
  return CompositeHamiltonian(model, std::make_shared<const AgentPositionBasis>(basis));
}

Eigen::VectorXcd start_vector(const CompositeHamiltonian& H) {
  const AgentBasis& basis = H.agent();
  const AdiabaticLevels lv = adiabatic_levels(H.model(), -1.0606);
  return CompositeState::product(lv.vectors.col(0).cast<cplx>(), coherent_state(basis, -1.0606, 0.0)).amplitudes();
}

void BM_CompositeMatvec(benchmark::State& state) {
  const SystemModel model = trimer();
  const CompositeHamiltonian H = composite(model, static_cast<int>(state.range(0)));
  const Eigen::VectorXcd psi = start_vector(H);
  Eigen::VectorXcd out(psi.size());
  for (auto _ : state) {
    H.apply(psi, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(H.dim()));
}
BENCHMARK(BM_CompositeMatvec)->Arg(200)->Arg(525)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_KrylovStep(benchmark::State& state) {
  const SystemModel model = trimer();
  const CompositeHamiltonian H = composite(model, static_cast<int>(state.range(0)));
  const LinearMap op = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) { H.apply(in, out); };
  Eigen::VectorXcd psi = start_vector(H);
  KrylovPropagator prop;
  for (auto _ : state) {
    prop.advance(op, psi, 1.0, 1.0);
    benchmark::DoNotOptimize(psi.data());
  }
  state.counters["matvecs_per_step"] =
      benchmark::Counter(static_cast<double>(prop.stats().matvecs), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_KrylovStep)->Arg(200)->Arg(525)->Unit(benchmark::kMillisecond);

void BM_DrivenSweep(benchmark::State& state) {
  const SystemModel model = trimer();
  const DriveProtocol drive = DriveProtocol::classical_cosine(1.0606, 0.02);
  DrivenOptions opts;
  opts.t_final = drive.t_end();
  opts.checkpoints = 1;
  for (auto _ : state) {
    const Trajectory tr = evolve_driven(model, drive, 0, opts);
    benchmark::DoNotOptimize(tr.states.back().data());
  }
}
BENCHMARK(BM_DrivenSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
