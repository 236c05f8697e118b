#include <benchmark/benchmark.h>

#include <random>

#include "msplace/placement.hpp"
#include "msplace/relcore.hpp"
#include "msplace/simulator.hpp"

namespace {

using namespace msplace;

InfrastructureNetwork network(int nodes, double p = 0.2) {
  auto net = generate_er_topology(nodes, p, TopologyRanges{}, 42);
  net.set_access_nodes(select_access_nodes(net, 0.2));
  return net;
}

void BM_FindIdps(benchmark::State& state) {
  const auto net = network(static_cast<int>(state.range(0)));
  const auto n = static_cast<NodeId>(net.node_count());
  NodeId src = 0;
  for (auto _ : state) {
    const NodeId dst = (src + n / 2) % n;
    benchmark::DoNotOptimize(find_idps(net, src, dst, PathQuery{4, 1.0, Pool::kProtected, 1e9}));
    src = (src + 1) % n;
  }
}
BENCHMARK(BM_FindIdps)->Arg(30)->Arg(50)->Arg(100);

void BM_NetworkReliabilityMatrix(benchmark::State& state) {
  const auto net = network(static_cast<int>(state.range(0)), 0.4);
  const int k = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(network_reliability_matrix(net, k));
}
BENCHMARK(BM_NetworkReliabilityMatrix)->Args({7, 4})->Args({10, 3})->Args({10, 4});

void BM_PlaceRequest(benchmark::State& state) {
  const auto algorithm = static_cast<Algorithm>(state.range(0));
  const auto net = network(50);
  std::mt19937_64 rng(7);
  std::vector<ServiceRequest> requests;
  for (int i = 0; i < 64; ++i) requests.push_back(generate_request(WorkloadRanges{}, net.access_nodes(), rng, i));
  std::size_t i = 0;
  for (auto _ : state) {
    auto copy = net;
    benchmark::DoNotOptimize(place_request(algorithm, copy, requests[i++ % requests.size()], PlacementConfig{}));
  }
  state.SetLabel(std::string(algorithm_name(algorithm)));
}
BENCHMARK(BM_PlaceRequest)->DenseRange(0, 5)->Unit(benchmark::kMicrosecond);

void BM_SampleAndLiveness(benchmark::State& state) {
  auto net = network(50);
  std::mt19937_64 rng(9);
  std::vector<ActivePlacement> active;
  for (int i = 0; i < 40; ++i) {
    auto req = generate_request(WorkloadRanges{}, net.access_nodes(), rng, i);
    auto out = srp_place(net, req, PlacementConfig{});
    if (out.success) active.push_back(ActivePlacement{req, std::move(out.state)});
  }
  std::uint64_t step = 0;
  for (auto _ : state) {
    const auto sample = sample_failures(active, net, step++);
    int alive = 0;
    for (const auto& a : active) alive += evaluate_service_alive(a.request, a.state, sample, net) ? 1 : 0;
    benchmark::DoNotOptimize(alive);
  }
  state.counters["services"] = static_cast<double>(active.size());
}
BENCHMARK(BM_SampleAndLiveness);

}  // namespace

BENCHMARK_MAIN();
