#ifndef AGGSPEC_RECORD_HPP
#define AGGSPEC_RECORD_HPP

/**
 * @file record.hpp
 * @brief Time-stamped snapshots and diagnostic series, with CSV and binary files.
 *
 * CSV layout (text, '\n' line endings):
 *
 *   # aggspec-record 1
 *   # version: <code version>
 *   # seed: <uint64>
 *   # grid: <M> <L>
 *   # species: <N>
 *   # config: <single-line JSON>
 *   # diag,<t>,<steady_metric>,<min_value>,<mass_1..N>,<l2_1..N>
 *   t,x,species_index,value
 *   <t>,<x>,<i>,<value>            one row per (frame, species, point)
 *
 * Diagnostic rows precede the column header; every number is written with 17
 * significant digits. Species indices are 0-based.
 *
 * Binary layout (all integers and floats little-endian):
 *
 *   bytes 0..7   magic "AGSPREC\0"
 *   u32          format version (1)
 *   u32          reserved (0)
 *   u64          seed
 *   u64          M
 *   f64          L
 *   u64          N
 *   u64, bytes   code version string (length, then bytes)
 *   u64, bytes   config JSON string
 *   u64          frame count F
 *   F x { f64 t, N*M f64 values species-major }
 *   u64          diagnostic count G
 *   G x { f64 t, f64 steady_metric, f64 min_value, N f64 masses, N f64 l2 }
 */

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggspec/spectral.hpp"

namespace aggspec {

struct RecordHeader {
  std::string code_version;
  std::uint64_t seed = 0;
  std::string config_json = "{}";
};

struct Frame {
  double t = 0.0;
  std::vector<double> values;  // N * M, species-major
};

struct DiagnosticSample {
  double t = 0.0;
  double steady_metric = 0.0;  // NaN before the first check interval
  double min_value = 0.0;
  std::vector<double> masses;
  std::vector<double> l2_norms;
};

struct SimulationRecord {
  SimulationRecord(Grid grid, std::size_t species) : grid(grid), species(species) {}

  Grid grid;
  std::size_t species;
  RecordHeader header;
  std::vector<Frame> frames;
  std::vector<DiagnosticSample> diagnostics;
};

enum class RecordFormat { Csv, Binary };

RecordFormat record_format_from_string(const std::string& name);
std::string to_string(RecordFormat format);
std::string record_extension(RecordFormat format);

class RecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_record(const SimulationRecord& record, const std::string& path, RecordFormat format);

/// Detects the format from the leading bytes.
SimulationRecord read_record(const std::string& path);

/// Throws RecordError unless frame times are strictly increasing and values finite.
void validate_record(const SimulationRecord& record);

}  // namespace aggspec

#endif  // AGGSPEC_RECORD_HPP
