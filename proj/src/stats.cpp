#include "microcircuit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "microcircuit/random.hpp"

namespace microcircuit {

namespace {

constexpr double kStepTolerance = 1e-6;

// Per-group accumulation over one pass of the record.
struct GroupAccumulator {
  std::int64_t spikes = 0;
  double cv_sum = 0.0;
  std::int64_t cv_neurons = 0;
  std::vector<double> bins;
};

struct NeuronTrain {
  std::int64_t count = 0;
  std::uint32_t last_step = 0;
  // Welford over ISIs (in steps).
  double mean = 0.0;
  double m2 = 0.0;
};

// group[id] in [0, groups) or -1. Rate/CV use `window`, synchrony `sync`.
std::vector<GroupAccumulator> accumulate(const SpikeRecord& rec, const std::vector<std::int8_t>& group, int groups,
                                         Window window, Window sync, double bin_ms) {
  if (!(bin_ms > 0.0)) throw std::invalid_argument("bin width must be > 0");
  std::vector<GroupAccumulator> acc(static_cast<std::size_t>(groups));
  const double dt = rec.dt_ms;
  const double from_k = window.from_ms / dt, to_k = window.to_ms / dt;
  const double sync_from_k = sync.from_ms / dt, sync_to_k = sync.to_ms / dt;
  const auto nbins = static_cast<std::size_t>(std::max(0.0, std::floor((sync.to_ms - sync.from_ms) / bin_ms + 1e-9)));
  for (auto& a : acc) a.bins.assign(nbins, 0.0);

  std::vector<NeuronTrain> trains(group.size());
  for (const SpikeEvent& e : rec.events) {
    const int g = group[e.neuron];
    if (g < 0) continue;
    const double k = static_cast<double>(e.step) + 1.0;
    if (k > from_k + kStepTolerance && k <= to_k + kStepTolerance) {
      ++acc[g].spikes;
      NeuronTrain& tr = trains[e.neuron];
      if (tr.count > 0) {
        const double isi = static_cast<double>(e.step - tr.last_step);
        const double n = static_cast<double>(tr.count);  // ISIs so far + 1
        const double delta = isi - tr.mean;
        tr.mean += delta / n;
        tr.m2 += delta * (isi - tr.mean);
      }
      ++tr.count;
      tr.last_step = e.step;
    }
    if (k > sync_from_k + kStepTolerance && k <= sync_to_k + kStepTolerance) {
      const double x = (k - sync_from_k) * dt / bin_ms;
      const auto b = static_cast<std::size_t>(std::max(0.0, std::ceil(x - 1e-9) - 1.0));
      if (b < nbins) acc[g].bins[b] += 1.0;
    }
  }
  for (std::size_t id = 0; id < trains.size(); ++id) {
    const NeuronTrain& tr = trains[id];
    if (group[id] < 0 || tr.count < 2) continue;
    const double n_isi = static_cast<double>(tr.count - 1);
    acc[group[id]].cv_sum += std::sqrt(tr.m2 / n_isi) / tr.mean;
    ++acc[group[id]].cv_neurons;
  }
  return acc;
}

std::optional<double> fano(const std::vector<double>& bins) {
  if (bins.empty()) return std::nullopt;
  const double n = static_cast<double>(bins.size());
  const double mean = std::accumulate(bins.begin(), bins.end(), 0.0) / n;
  if (!(mean > 0.0)) return std::nullopt;
  double var = 0.0;
  for (double b : bins) var += (b - mean) * (b - mean);
  return (var / n) / mean;
}

std::optional<double> mean_cv(const GroupAccumulator& a) {
  if (a.cv_neurons == 0) return std::nullopt;
  return a.cv_sum / static_cast<double>(a.cv_neurons);
}

std::vector<std::int8_t> single_group(std::size_t n, std::span<const NeuronId> ids) {
  std::vector<std::int8_t> group(n, -1);
  for (NeuronId id : ids) {
    if (id >= n) throw std::out_of_range("neuron id outside the record");
    group[id] = 0;
  }
  return group;
}

Window sync_window(const SpikeRecord& rec, double length_ms) {
  Window w = analysis_window(rec);
  if (length_ms > 0.0) w.to_ms = std::min(w.to_ms, w.from_ms + length_ms);
  return w;
}

}  // namespace

SamplingPlan SamplingPlan::parse(std::string_view text, std::uint64_t seed) {
  SamplingPlan plan;
  plan.seed = seed;
  std::string s(text);
  if (s == "all") {
    plan.strategy = SamplingStrategy::kAll;
    plan.n = 0;
    return plan;
  }
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("sampling plan must be all, fraction:N or per-pop:N[:cap]");
  const std::string kind = s.substr(0, colon);
  std::string rest = s.substr(colon + 1);
  if (const auto c2 = rest.find(':'); c2 != std::string::npos) {
    if (rest.substr(c2 + 1) != "cap") throw std::invalid_argument("unknown sampling modifier in '" + s + "'");
    plan.cap_at_population = true;
    rest = rest.substr(0, c2);
  }
  if (kind == "fraction")
    plan.strategy = SamplingStrategy::kFixedFractionTotal;
  else if (kind == "per-pop")
    plan.strategy = SamplingStrategy::kFixedPerPopulation;
  else
    throw std::invalid_argument("unknown sampling strategy '" + kind + "'");
  try {
    std::size_t used = 0;
    plan.n = std::stoll(rest, &used);
    if (used != rest.size() || plan.n < 0) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid sample size in '" + s + "'");
  }
  return plan;
}

std::string SamplingPlan::to_string() const {
  switch (strategy) {
    case SamplingStrategy::kAll: return "all";
    case SamplingStrategy::kFixedFractionTotal: return "fraction:" + std::to_string(n);
    case SamplingStrategy::kFixedPerPopulation:
      return "per-pop:" + std::to_string(n) + (cap_at_population ? ":cap" : "");
  }
  return "all";
}

CountVector SamplingPlan::resolve_counts(const CountVector& sizes) const {
  CountVector counts;
  switch (strategy) {
    case SamplingStrategy::kAll: return sizes;
    case SamplingStrategy::kFixedPerPopulation: counts.setConstant(n); break;
    case SamplingStrategy::kFixedFractionTotal: {
      const double total = static_cast<double>(sizes.sum());
      for (int i = 0; i < kNumPopulations; ++i)
        counts(i) = total > 0.0 ? std::llround(static_cast<double>(n) * static_cast<double>(sizes(i)) / total) : 0;
      break;
    }
  }
  for (int i = 0; i < kNumPopulations; ++i) {
    if (counts(i) <= sizes(i)) continue;
    if (cap_at_population) {
      counts(i) = sizes(i);
    } else {
      throw std::invalid_argument("cannot sample " + std::to_string(counts(i)) + " neurons from population " +
                                  std::string(kPopulationNames[i]) + " of size " + std::to_string(sizes(i)));
    }
  }
  return counts;
}

SampledIds resolve_sampling(const SamplingPlan& plan, const std::array<IdRange, kNumPopulations>& populations) {
  CountVector sizes;
  for (int i = 0; i < kNumPopulations; ++i) sizes(i) = static_cast<std::int64_t>(populations[i].size());
  const CountVector counts = plan.resolve_counts(sizes);
  const random::Key key = random::make_key(plan.seed, random::Domain::kSampling);
  SampledIds out;
  for (int p = 0; p < kNumPopulations; ++p) {
    const std::size_t size = populations[p].size();
    const auto m = static_cast<std::size_t>(counts(p));
    std::vector<NeuronId> ids(size);
    std::iota(ids.begin(), ids.end(), populations[p].begin);
    if (m < size) {
      random::CounterRng rng(key, static_cast<std::uint64_t>(p));
      for (std::size_t i = 0; i < m; ++i) std::swap(ids[i], ids[i + rng.uniform_int(size - i)]);
      ids.resize(m);
      std::sort(ids.begin(), ids.end());
    }
    out[p] = std::move(ids);
  }
  return out;
}

Window analysis_window(const SpikeRecord& record) { return {record.transient_ms, record.duration_ms}; }

double mean_rate(const SpikeRecord& record, std::span<const NeuronId> ids, double duration_ms, double transient_ms) {
  if (!(duration_ms > transient_ms)) throw std::invalid_argument("duration must exceed the transient");
  if (ids.empty()) throw std::invalid_argument("mean rate of an empty neuron set");
  const Window w{transient_ms, duration_ms};
  const auto acc = accumulate(record, single_group(record.num_neurons(), ids), 1, w, w, duration_ms - transient_ms);
  return static_cast<double>(acc[0].spikes) / (static_cast<double>(ids.size()) * (duration_ms - transient_ms) * 1e-3);
}

std::optional<double> train_cv(std::span<const double> t) {
  if (t.size() < 3) {
    if (t.size() == 2) return 0.0;
    return std::nullopt;
  }
  const double n = static_cast<double>(t.size() - 1);
  double mean = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) mean += t[i] - t[i - 1];
  mean /= n;
  double var = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) var += (t[i] - t[i - 1] - mean) * (t[i] - t[i - 1] - mean);
  return std::sqrt(var / n) / mean;
}

std::optional<double> cv_isi(const SpikeRecord& record, std::span<const NeuronId> ids) {
  return cv_isi(record, ids, analysis_window(record));
}

std::optional<double> cv_isi(const SpikeRecord& record, std::span<const NeuronId> ids, Window window) {
  const auto acc = accumulate(record, single_group(record.num_neurons(), ids), 1, window, window, 3.0);
  return mean_cv(acc[0]);
}

std::optional<double> synchrony(const SpikeRecord& record, std::span<const NeuronId> ids, double bin_ms) {
  return synchrony(record, ids, bin_ms, analysis_window(record));
}

std::optional<double> synchrony(const SpikeRecord& record, std::span<const NeuronId> ids, double bin_ms,
                                Window window) {
  const auto acc = accumulate(record, single_group(record.num_neurons(), ids), 1, window, window, bin_ms);
  return fano(acc[0].bins);
}

StatsReport report(const SpikeRecord& record, const SamplingPlan& plan, const StatsOptions& options) {
  StatsReport r;
  r.duration_ms = record.duration_ms;
  r.transient_ms = record.transient_ms;
  r.bin_ms = options.bin_ms;
  r.plan = plan;
  const Window sync = sync_window(record, options.sync_window_ms);
  r.sync_window_ms = sync.to_ms - sync.from_ms;

  const SampledIds ids = resolve_sampling(plan, record.populations);
  std::vector<std::int8_t> group(record.num_neurons(), -1);
  for (int p = 0; p < kNumPopulations; ++p) {
    for (NeuronId id : ids[p]) group[id] = static_cast<std::int8_t>(p);
    r.sampled_counts(p) = static_cast<std::int64_t>(ids[p].size());
  }
  const auto acc = accumulate(record, group, kNumPopulations, analysis_window(record), sync, options.bin_ms);
  const double seconds = (record.duration_ms - record.transient_ms) * 1e-3;
  for (int p = 0; p < kNumPopulations; ++p) {
    auto& s = r.populations[p];
    s.name = std::string(kPopulationNames[p]);
    s.sampled = r.sampled_counts(p);
    s.mean_rate_hz = s.sampled > 0 ? static_cast<double>(acc[p].spikes) / (static_cast<double>(s.sampled) * seconds) : 0.0;
    s.irregularity = mean_cv(acc[p]);
    s.synchrony = fano(acc[p].bins);
  }
  return r;
}

nlohmann::json to_json(const StatsReport& r) {
  using nlohmann::json;
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["metadata"] = {{"duration_ms", r.duration_ms},
                   {"transient_ms", r.transient_ms},
                   {"bin_ms", r.bin_ms},
                   {"sync_window_ms", r.sync_window_ms},
                   {"sampling", {{"plan", r.plan.to_string()}, {"seed", r.plan.seed}}}};
  json pops = json::array();
  for (const auto& p : r.populations)
    pops.push_back({{"name", p.name},
                    {"sampled", p.sampled},
                    {"mean_rate_Hz", p.mean_rate_hz},
                    {"irregularity_cv_isi", opt(p.irregularity)},
                    {"synchrony", opt(p.synchrony)}});
  j["populations"] = pops;
  return j;
}

std::string to_csv(const StatsReport& r) {
  std::ostringstream out;
  out.precision(10);
  out << "population,sampled,mean_rate_Hz,irregularity_cv_isi,synchrony\n";
  for (const auto& p : r.populations) {
    out << p.name << ',' << p.sampled << ',' << p.mean_rate_hz << ',';
    if (p.irregularity) out << *p.irregularity;
    out << ',';
    if (p.synchrony) out << *p.synchrony;
    out << '\n';
  }
  return out.str();
}

std::vector<RasterPoint> raster(const SpikeRecord& record, const SampledIds& ids, double from_ms, double to_ms) {
  std::vector<char> keep(record.num_neurons(), 0);
  for (const auto& pop : ids)
    for (NeuronId id : pop) keep[id] = 1;
  std::vector<RasterPoint> out;
  for (const SpikeEvent& e : record.events) {
    const double t = record.time_ms(e);
    if (keep[e.neuron] && t >= from_ms && t <= to_ms) out.push_back({t, e.neuron});
  }
  return out;
}

}  // namespace microcircuit
