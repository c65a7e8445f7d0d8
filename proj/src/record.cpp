#include "aggspec/record.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

namespace aggspec {

namespace {

constexpr std::array<char, 8> kMagic = {'A', 'G', 'S', 'P', 'R', 'E', 'C', '\0'};
constexpr std::uint32_t kBinaryVersion = 1;
constexpr const char* kCsvBanner = "# aggspec-record 1";
constexpr const char* kCsvColumns = "t,x,species_index,value";

class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out_.put(static_cast<char>((v >> (8 * b)) & 0xffu));
  }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out_.put(static_cast<char>((v >> (8 * b)) & 0xffu));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void raw(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }

 private:
  std::ostream& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}

  std::uint64_t u(int bytes) {
    std::array<unsigned char, 8> buf{};
    in_.read(reinterpret_cast<char*>(buf.data()), bytes);
    if (in_.gcount() != bytes) throw RecordError("binary record is truncated");
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u(4)); }
  std::uint64_t u64() { return u(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > (1ull << 32)) throw RecordError("binary record has an implausible string length");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::uint64_t>(in_.gcount()) != n) throw RecordError("binary record is truncated");
    return s;
  }

 private:
  std::istream& in_;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw RecordError(context + ": not a number: '" + token + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

void write_binary(const SimulationRecord& r, std::ostream& out) {
  ByteWriter w(out);
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kBinaryVersion);
  w.u32(0);
  w.u64(r.header.seed);
  w.u64(r.grid.size());
  w.f64(r.grid.length());
  w.u64(r.species);
  w.str(r.header.code_version);
  w.str(r.header.config_json);
  w.u64(r.frames.size());
  for (const auto& f : r.frames) {
    w.f64(f.t);
    for (double v : f.values) w.f64(v);
  }
  w.u64(r.diagnostics.size());
  for (const auto& d : r.diagnostics) {
    w.f64(d.t);
    w.f64(d.steady_metric);
    w.f64(d.min_value);
    for (double v : d.masses) w.f64(v);
    for (double v : d.l2_norms) w.f64(v);
  }
}

SimulationRecord read_binary(std::istream& in) {
  ByteReader rd(in);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 8 || magic != kMagic) throw RecordError("not an aggspec binary record");
  const std::uint32_t version = rd.u32();
  if (version != kBinaryVersion) {
    throw RecordError("binary record version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kBinaryVersion) + ")");
  }
  rd.u32();
  RecordHeader header;
  header.seed = rd.u64();
  const std::uint64_t m = rd.u64();
  const double length = rd.f64();
  const std::uint64_t n = rd.u64();
  SimulationRecord r(Grid(m, length), n);
  header.code_version = rd.str();
  header.config_json = rd.str();
  r.header = std::move(header);
  const std::uint64_t frames = rd.u64();
  const std::size_t values = n * m;
  for (std::uint64_t f = 0; f < frames; ++f) {
    Frame frame;
    frame.t = rd.f64();
    frame.values.resize(values);
    for (auto& v : frame.values) v = rd.f64();
    r.frames.push_back(std::move(frame));
  }
  const std::uint64_t diags = rd.u64();
  for (std::uint64_t k = 0; k < diags; ++k) {
    DiagnosticSample d;
    d.t = rd.f64();
    d.steady_metric = rd.f64();
    d.min_value = rd.f64();
    d.masses.resize(n);
    d.l2_norms.resize(n);
    for (auto& v : d.masses) v = rd.f64();
    for (auto& v : d.l2_norms) v = rd.f64();
    r.diagnostics.push_back(std::move(d));
  }
  return r;
}

void write_csv(const SimulationRecord& r, std::ostream& out) {
  out << kCsvBanner << '\n';
  out << "# version: " << r.header.code_version << '\n';
  out << "# seed: " << r.header.seed << '\n';
  out << "# grid: " << r.grid.size() << ' ' << fmt17(r.grid.length()) << '\n';
  out << "# species: " << r.species << '\n';
  std::string config = r.header.config_json;
  for (auto& c : config) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  out << "# config: " << config << '\n';
  for (const auto& d : r.diagnostics) {
    out << "# diag," << fmt17(d.t) << ',' << fmt17(d.steady_metric) << ',' << fmt17(d.min_value);
    for (double v : d.masses) out << ',' << fmt17(v);
    for (double v : d.l2_norms) out << ',' << fmt17(v);
    out << '\n';
  }
  out << kCsvColumns << '\n';
  const std::size_t m = r.grid.size();
  std::vector<std::string> xs(m);
  for (std::size_t k = 0; k < m; ++k) xs[k] = fmt17(r.grid.x(k));
  for (const auto& f : r.frames) {
    const std::string t = fmt17(f.t);
    for (std::size_t i = 0; i < r.species; ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        out << t << ',' << xs[k] << ',' << i << ',' << fmt17(f.values[i * m + k]) << '\n';
      }
    }
  }
}

SimulationRecord read_csv(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line != kCsvBanner) throw RecordError("not an aggspec CSV record (bad banner)");

  RecordHeader header;
  std::size_t m = 0;
  double length = 0.0;
  std::size_t n = 0;
  bool have_grid = false;
  bool have_species = false;
  std::vector<DiagnosticSample> diags;
  bool saw_columns = false;

  auto field = [](const std::string& l, const std::string& key) -> std::optional<std::string> {
    if (l.rfind(key, 0) == 0) return l.substr(key.size());
    return std::nullopt;
  };

  while (std::getline(in, line)) {
    if (line == kCsvColumns) {
      saw_columns = true;
      break;
    }
    if (auto v = field(line, "# version: ")) {
      header.code_version = *v;
    } else if (auto v = field(line, "# seed: ")) {
      header.seed = std::stoull(*v);
    } else if (auto v = field(line, "# grid: ")) {
      std::istringstream g(*v);
      std::string l;
      g >> m >> l;
      length = parse_double(l, "grid header");
      have_grid = true;
    } else if (auto v = field(line, "# species: ")) {
      n = std::stoul(*v);
      have_species = true;
    } else if (auto v = field(line, "# config: ")) {
      header.config_json = *v;
    } else if (auto v = field(line, "# diag,")) {
      if (!have_species) throw RecordError("diagnostic row before species header");
      auto parts = split(*v, ',');
      if (parts.size() != 3 + 2 * n) throw RecordError("diagnostic row has the wrong number of columns");
      DiagnosticSample d;
      d.t = parse_double(parts[0], "diag");
      d.steady_metric = parse_double(parts[1], "diag");
      d.min_value = parse_double(parts[2], "diag");
      for (std::size_t i = 0; i < n; ++i) d.masses.push_back(parse_double(parts[3 + i], "diag"));
      for (std::size_t i = 0; i < n; ++i) d.l2_norms.push_back(parse_double(parts[3 + n + i], "diag"));
      diags.push_back(std::move(d));
    } else if (!line.empty() && line[0] != '#') {
      throw RecordError("unexpected line before column header: '" + line + "'");
    }
  }
  if (!have_grid || !have_species) throw RecordError("CSV record is missing the grid or species header");
  if (!saw_columns) throw RecordError("CSV record is truncated (no column header)");

  SimulationRecord r(Grid(m, length), n);
  r.header = std::move(header);
  r.diagnostics = std::move(diags);

  const std::size_t per_frame = n * m;
  std::size_t filled = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto parts = split(line, ',');
    if (parts.size() != 4) throw RecordError("data row must have 4 columns: '" + line + "'");
    const double t = parse_double(parts[0], "t");
    const std::size_t species = std::stoul(parts[2]);
    const double value = parse_double(parts[3], "value");
    if (filled == 0) {
      r.frames.push_back(Frame{t, std::vector<double>(per_frame)});
    } else if (t != r.frames.back().t) {
      throw RecordError("frame at t=" + fmt17(r.frames.back().t) + " is incomplete");
    }
    const std::size_t expected_species = filled / m;
    if (species != expected_species) throw RecordError("data rows are out of order");
    r.frames.back().values[filled] = value;
    filled = (filled + 1) % per_frame;
  }
  if (filled != 0) throw RecordError("CSV record is truncated inside a frame");
  return r;
}

}  // namespace

RecordFormat record_format_from_string(const std::string& name) {
  if (name == "csv") return RecordFormat::Csv;
  if (name == "binary" || name == "bin") return RecordFormat::Binary;
  throw std::invalid_argument("unknown record format '" + name + "' (expected csv|binary)");
}

std::string to_string(RecordFormat format) { return format == RecordFormat::Csv ? "csv" : "binary"; }

std::string record_extension(RecordFormat format) {
  return format == RecordFormat::Csv ? ".csv" : ".bin";
}

void write_record(const SimulationRecord& record, const std::string& path, RecordFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RecordError("cannot open '" + path + "' for writing");
  if (format == RecordFormat::Binary) {
    write_binary(record, out);
  } else {
    write_csv(record, out);
  }
  out.flush();
  if (!out) throw RecordError("write to '" + path + "' failed");
}

SimulationRecord read_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RecordError("cannot open record '" + path + "'");
  const int first = in.peek();
  if (first == std::char_traits<char>::eof()) throw RecordError("record '" + path + "' is empty");
  if (first == kMagic[0]) return read_binary(in);
  return read_csv(in);
}

void validate_record(const SimulationRecord& record) {
  const std::size_t per_frame = record.species * record.grid.size();
  for (std::size_t f = 0; f < record.frames.size(); ++f) {
    const auto& frame = record.frames[f];
    if (frame.values.size() != per_frame) throw RecordError("frame has the wrong number of values");
    if (f > 0 && !(frame.t > record.frames[f - 1].t)) {
      throw RecordError("frame times are not strictly increasing at index " + std::to_string(f));
    }
    for (double v : frame.values) {
      if (!std::isfinite(v)) throw RecordError("frame at t=" + fmt17(frame.t) + " holds a non-finite value");
    }
  }
}

}  // namespace aggspec
