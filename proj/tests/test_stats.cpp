#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "microcircuit/stats.hpp"

using namespace microcircuit;

namespace {

SpikeRecord empty_record(std::int64_t neurons_per_pop, double duration_ms, double transient_ms) {
  SpikeRecord r;
  r.dt_ms = 0.1;
  r.duration_ms = duration_ms;
  r.transient_ms = transient_ms;
  r.populations = population_ranges(CountVector::Constant(neurons_per_pop));
  return r;
}

std::uint32_t step_of(double t_ms) { return static_cast<std::uint32_t>(std::llround(t_ms / 0.1)) - 1; }

void sort_events(SpikeRecord& r) {
  std::sort(r.events.begin(), r.events.end(), [](const SpikeEvent& a, const SpikeEvent& b) {
    return a.step != b.step ? a.step < b.step : a.neuron < b.neuron;
  });
  r.events.erase(std::unique(r.events.begin(), r.events.end()), r.events.end());
}

// Independent Poisson trains for every neuron of the record.
SpikeRecord poisson_record(std::int64_t per_pop, double rate_hz, double duration_ms, std::uint64_t seed) {
  SpikeRecord r = empty_record(per_pop, duration_ms, 0.0);
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> isi(rate_hz * 1e-3);
  for (NeuronId n = 0; n < r.num_neurons(); ++n)
    for (double t = isi(gen); t < duration_ms; t += isi(gen))
      if (t >= 0.1) r.events.push_back({step_of(t), n});
  sort_events(r);
  return r;
}

// Every neuron in `ids` fires at 100, 200, ... ms.
SpikeRecord synchronous_record(std::span<const NeuronId> ids, double duration_ms) {
  SpikeRecord r = empty_record(200, duration_ms, 0.0);
  for (double t = 100.0; t <= duration_ms; t += 100.0)
    for (NeuronId id : ids) r.events.push_back({step_of(t), id});
  sort_events(r);
  return r;
}

std::vector<NeuronId> first_ids(std::size_t n) {
  std::vector<NeuronId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<NeuronId>(i);
  return ids;
}

}  // namespace

TEST_CASE("fixed fraction of 8000 on the canonical sizes") {
  const SamplingPlan plan = SamplingPlan::parse("fraction:8000");
  const CountVector expected{{2144, 605, 2272, 568, 503, 110, 1492, 306}};
  CHECK(plan.resolve_counts(canonical_config().sizes()) == expected);
}

TEST_CASE("per-population and all plans") {
  const CountVector sizes = canonical_config().sizes();
  CHECK(SamplingPlan::parse("per-pop:1000").resolve_counts(sizes) == CountVector::Constant(1000));
  CHECK(SamplingPlan::parse("all").resolve_counts(sizes) == sizes);

  const CountVector small = apply_transform(canonical_config(), 0.1).transform.scaled_sizes;
  try {
    SamplingPlan::parse("per-pop:1000").resolve_counts(small);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("L2i") != std::string::npos);
  }
  const CountVector capped = SamplingPlan::parse("per-pop:1000:cap").resolve_counts(small);
  CHECK(capped == small.cwiseMin(1000));
}

TEST_CASE("plan parsing") {
  CHECK(SamplingPlan::parse("per-pop:1000:cap").to_string() == "per-pop:1000:cap");
  CHECK(SamplingPlan::parse("fraction:8000", 3).seed == 3);
  for (const char* bad : {"", "some", "fraction:", "fraction:abc", "per-pop:10:x", "random:5", "per-pop:-1"})
    CHECK_THROWS_AS(SamplingPlan::parse(bad), std::invalid_argument);
}

TEST_CASE("sampling is a deterministic uniform subset") {
  const auto ranges = population_ranges(canonical_config().sizes());
  const SamplingPlan plan = SamplingPlan::parse("fraction:8000", 17);
  const SampledIds a = resolve_sampling(plan, ranges);
  CHECK(a == resolve_sampling(plan, ranges));
  CHECK_FALSE(a == resolve_sampling(SamplingPlan::parse("fraction:8000", 18), ranges));
  for (int p = 0; p < kNumPopulations; ++p) {
    CHECK(std::is_sorted(a[p].begin(), a[p].end()));
    CHECK(std::set<NeuronId>(a[p].begin(), a[p].end()).size() == a[p].size());
    for (NeuronId id : a[p]) REQUIRE(ranges[p].contains(id));
  }
  // Inclusion is uniform: over many seeds each id of a small population is
  // picked with probability m / N.
  const auto small = population_ranges(CountVector::Constant(20));
  std::vector<int> hits(20, 0);
  const int trials = 20000;
  for (int s = 0; s < trials; ++s) {
    const SampledIds picked = resolve_sampling(SamplingPlan::parse("per-pop:5", static_cast<std::uint64_t>(s)), small);
    for (NeuronId id : picked[0]) ++hits[id];
  }
  for (int h : hits) CHECK(std::abs(h - trials / 4) < 5.0 * std::sqrt(trials * 0.25 * 0.75));
}

TEST_CASE("mean rate") {
  SpikeRecord r = empty_record(10, 60000.0, 0.0);
  for (int s = 1; s <= 60; ++s) r.events.push_back({step_of(1000.0 * s - 500.0), 3});
  const std::vector<NeuronId> one{3};
  CHECK(mean_rate(r, one, 60000.0, 0.0) == doctest::Approx(1.0));
  // The window is (transient, duration].
  CHECK(mean_rate(r, one, 60000.0, 30000.0) == doctest::Approx(1.0));
  CHECK(mean_rate(empty_record(10, 1000.0, 0.0), one, 1000.0, 0.0) == 0.0);
  CHECK_THROWS(mean_rate(r, one, 100.0, 100.0));
  CHECK_THROWS(mean_rate(r, std::vector<NeuronId>{}, 1000.0, 0.0));

  SpikeRecord edge = empty_record(1, 1000.0, 100.0);
  edge.events = {{step_of(100.0), 0}, {step_of(100.1), 0}, {step_of(1000.0), 0}};
  CHECK(mean_rate(edge, std::vector<NeuronId>{0}, 1000.0, 100.0) == doctest::Approx(2.0 / 0.9));
}

TEST_CASE("coefficient of variation") {
  CHECK(train_cv(std::vector<double>{0.0, 1.0, 4.0}) == doctest::Approx(0.5));
  CHECK(train_cv(std::vector<double>{0.0, 10.0, 20.0, 30.0}) == doctest::Approx(0.0));
  CHECK_FALSE(train_cv(std::vector<double>{5.0}).has_value());

  SpikeRecord r = empty_record(2, 1000.0, 0.0);
  r.events = {{step_of(10.0), 0}, {step_of(20.0), 0}, {step_of(50.0), 0}, {step_of(60.0), 1}};
  sort_events(r);
  CHECK(cv_isi(r, std::vector<NeuronId>{0}) == doctest::Approx(0.5));
  CHECK(cv_isi(r, std::vector<NeuronId>{0, 1}) == doctest::Approx(0.5));
  CHECK_FALSE(cv_isi(r, std::vector<NeuronId>{1}).has_value());

  SpikeRecord periodic = empty_record(1, 10000.0, 0.0);
  for (int s = 1; s <= 90; ++s) periodic.events.push_back({step_of(100.0 * s + 7.3), 0});
  CHECK(cv_isi(periodic, std::vector<NeuronId>{0}) == doctest::Approx(0.0));
}

TEST_CASE("cv is invariant under time scaling") {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> isi(0.01);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t{0.0};
    for (int i = 0; i < 200; ++i) t.push_back(t.back() + isi(gen));
    const double cv = *train_cv(t);
    for (double c : {0.001, 0.37, 3.0, 1e4}) {
      std::vector<double> scaled(t);
      for (double& x : scaled) x *= c;
      CHECK(*train_cv(scaled) == doctest::Approx(cv).epsilon(1e-12));
    }
  }
}

TEST_CASE("poisson trains have unit CV and unit synchrony") {
  const SpikeRecord r = poisson_record(25, 5.0, 600000.0, 11);
  const auto ids = first_ids(200);
  CHECK(std::abs(*cv_isi(r, ids) - 1.0) < 0.02);
  const SpikeRecord sixty = poisson_record(13, 5.0, 60000.0, 12);
  CHECK(std::abs(*synchrony(sixty, first_ids(100)) - 1.0) < 0.05);
}

TEST_CASE("synchrony of a perfectly synchronous population") {
  for (std::size_t n : {1u, 10u, 50u, 100u}) {
    const auto ids = first_ids(n);
    const SpikeRecord r = synchronous_record(ids, 60000.0);
    // 600 of 20000 bins hold n spikes each.
    const double expected = static_cast<double>(n) * (1.0 - 600.0 / 20000.0);
    CHECK(*synchrony(r, ids) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(*synchrony(r, ids) == doctest::Approx(static_cast<double>(n) * 32.333333 / 33.333333).epsilon(1e-6));
  }
  const auto ids = first_ids(100);
  const SpikeRecord r = synchronous_record(ids, 60000.0);
  const std::span<const NeuronId> all(ids);
  CHECK(*synchrony(r, all) == doctest::Approx(2.0 * *synchrony(r, all.first(50))).epsilon(1e-12));
  CHECK_FALSE(synchrony(empty_record(5, 1000.0, 0.0), first_ids(5)).has_value());
}

TEST_CASE("trailing partial bin is dropped") {
  SpikeRecord r = empty_record(1, 10.0, 0.0);
  r.events = {{step_of(1.0), 0}, {step_of(4.0), 0}, {step_of(9.5), 0}};
  // Bins (0,3], (3,6], (6,9]; the spike at 9.5 ms is outside.
  CHECK(*synchrony(r, std::vector<NeuronId>{0}) == doctest::Approx((2.0 / 9.0) / (2.0 / 3.0)));
}

TEST_CASE("report composition") {
  const SpikeRecord r = poisson_record(400, 4.0, 20000.0, 5);
  const SamplingPlan plan = SamplingPlan::parse("per-pop:100", 9);
  const StatsReport a = report(r, plan);
  const StatsReport b = report(r, plan);
  CHECK(nlohmann::to_string(to_json(a)) == nlohmann::to_string(to_json(b)));
  CHECK(to_csv(a) == to_csv(b));
  for (const auto& p : a.populations) {
    CHECK(p.sampled == 100);
    CHECK(p.mean_rate_hz >= 0.0);
    CHECK(*p.irregularity >= 0.0);
    CHECK(*p.synchrony >= 0.0);
  }
  const StatsReport all = report(r, SamplingPlan::parse("all"));
  const SampledIds ids = resolve_sampling(plan, r.populations);
  for (int p = 0; p < kNumPopulations; ++p) {
    CHECK(a.populations[p].mean_rate_hz == doctest::Approx(mean_rate(r, ids[p], r.duration_ms, r.transient_ms)));
    CHECK(*a.populations[p].irregularity == doctest::Approx(*cv_isi(r, ids[p])));
    CHECK(*a.populations[p].synchrony == doctest::Approx(*synchrony(r, ids[p])));
    CHECK(all.populations[p].mean_rate_hz == doctest::Approx(a.populations[p].mean_rate_hz).epsilon(0.05));
    CHECK(*all.populations[p].irregularity == doctest::Approx(*a.populations[p].irregularity).epsilon(0.05));
  }

  const auto j = to_json(a);
  CHECK(j["metadata"]["bin_ms"] == 3.0);
  CHECK(j["metadata"]["sampling"]["plan"] == "per-pop:100");
  CHECK(j["populations"].size() == 8);
  CHECK(to_csv(a).rfind("population,sampled,mean_rate_Hz,irregularity_cv_isi,synchrony\n", 0) == 0);

  const StatsReport windowed = report(r, plan, {3.0, 5000.0});
  CHECK(windowed.sync_window_ms == 5000.0);
  CHECK(a.sync_window_ms == 20000.0);
}

TEST_CASE("silent populations report absent statistics") {
  SpikeRecord r = empty_record(10, 1000.0, 100.0);
  const StatsReport s = report(r, SamplingPlan::parse("all"));
  for (const auto& p : s.populations) {
    CHECK(p.mean_rate_hz == 0.0);
    CHECK_FALSE(p.irregularity.has_value());
    CHECK_FALSE(p.synchrony.has_value());
  }
  CHECK(to_json(s)["populations"][0]["synchrony"].is_null());
}

TEST_CASE("raster keeps sampled ids inside the time range") {
  const SpikeRecord r = poisson_record(50, 10.0, 2000.0, 8);
  const SampledIds ids = resolve_sampling(SamplingPlan::parse("per-pop:5", 2), r.populations);
  std::set<NeuronId> chosen;
  for (const auto& pop : ids) chosen.insert(pop.begin(), pop.end());
  const auto points = raster(r, ids, 500.0, 1000.0);
  CHECK_FALSE(points.empty());
  for (const auto& p : points) {
    CHECK(chosen.count(p.neuron) == 1);
    CHECK(p.time_ms >= 500.0);
    CHECK(p.time_ms <= 1000.0);
  }
}
