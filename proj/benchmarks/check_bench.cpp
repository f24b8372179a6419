#include <benchmark/benchmark.h>

#include <random>

#include "ods/check.hpp"
#include "ods/compiler.hpp"
#include "ods/policy_io.hpp"

namespace {

ods::OdrlPolicy demo_policy(int permissions) {
  ods::OdrlPolicy policy;
  policy.uid = ods::Iri("https://example.com/policy/bench");
  policy.kind = ods::PolicyKind::Set;
  policy.profile.emplace_back(std::string(ods::kOdsNamespace));
  for (int i = 0; i < permissions; ++i) {
    ods::Rule rule;
    rule.action = ods::ActionTerm::of(ods::Action::Train);
    rule.target = ods::Iri("https://example.com/asset/ds" + std::to_string(i));
    rule.assignee =
        ods::PartyRef::concrete(ods::Iri("https://example.com/party/u" + std::to_string(i)));
    policy.permissions.push_back(std::move(rule));
  }
  return policy;
}

void BM_ParsePolicy(benchmark::State& state) {
  auto document = ods::serialize_policy(demo_policy(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(ods::parse_policy(document));
}
BENCHMARK(BM_ParsePolicy)->Arg(1)->Arg(16)->Arg(128);

void BM_CompilePolicy(benchmark::State& state) {
  auto policy = demo_policy(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ods::compile_policy(policy));
}
BENCHMARK(BM_CompilePolicy)->Arg(1)->Arg(16)->Arg(128);

void BM_Check(benchmark::State& state) {
  auto result = ods::compile_policy(demo_policy(static_cast<int>(state.range(0))));
  ods::CheckRequest request;
  request.object = {"asset", "ds0"};
  request.relation = "can_train";
  request.user = ods::UserRef::direct({"user", "u0"});
  for (auto _ : state)
    benchmark::DoNotOptimize(ods::check(result.tuples, result.model, request));
}
BENCHMARK(BM_Check)->Arg(1)->Arg(16)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
