#pragma once

#include <filesystem>
#include <iosfwd>

#include "microcircuit/engine.hpp"

namespace microcircuit {

/// One event per line, "time_ms<TAB>neuron_id", ordered by time then id.
/// Times are printed with as many decimals as dt needs.
void write_spikes_text(const SpikeRecord& record, std::ostream& out);
void write_spikes_text(const SpikeRecord& record, const std::filesystem::path& path);

/// Little-endian: "MCSPIKE1", f64 dt_ms, f64 duration_ms, f64 transient_ms,
/// u64 count, then count x (u32 step, u32 neuron_id). Event time is
/// (step + 1) * dt_ms.
void write_spikes_binary(const SpikeRecord& record, const std::filesystem::path& path);

/// Reads either format (detected by the magic). The text format carries no
/// metadata, so dt, duration, transient and population ranges come from
/// `layout`; the binary header overrides dt, duration and transient.
SpikeRecord read_spikes(const std::filesystem::path& path, const SpikeRecord& layout);

}  // namespace microcircuit
