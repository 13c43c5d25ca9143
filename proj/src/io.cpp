#include "nch/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace nch {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in, const char* what) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) {
    throw IoError(std::string("truncated input while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void expect_magic(std::istream& in, const char* magic) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw IoError(std::string("bad magic, expected ") + magic);
  }
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

void write_field(std::ostream& out, const Field& field, double time) {
  const GridGeometry& g = field.geometry();
  out.write("NCHF", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  put<double>(out, g.length());
  put<double>(out, time);
  for (double v : field.values()) put<double>(out, v);
  if (!out) throw IoError("write failed");
}

Snapshot read_field(std::istream& in) {
  expect_magic(in, "NCHF");
  const auto n = get<std::uint32_t>(in, "N");
  const auto length = get<double>(in, "L");
  const auto time = get<double>(in, "t");
  if (n < 2 || n > 65536) throw IoError("snapshot grid size out of range: " + std::to_string(n));
  GridGeometry g(static_cast<int>(n), length);
  std::vector<double> values(static_cast<std::size_t>(n) * n);
  for (double& v : values) v = get<double>(in, "values");
  return Snapshot{Field(g, std::move(values)), time};
}

void write_field(const std::filesystem::path& path, const Field& field, double time) {
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  write_field(out, field, time);
}

Snapshot read_field(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_field(in);
}

void write_field_csv(const std::filesystem::path& path, const Field& field) {
  auto out = open_out(path, std::ios::trunc);
  const GridGeometry& g = field.geometry();
  out << "i,j,x,y,value\n";
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      out << i << ',' << j << ',' << format_double((i + 0.5) * g.h()) << ','
          << format_double((j + 0.5) * g.h()) << ',' << format_double(field(i, j)) << '\n';
    }
  }
}

std::string snapshot_name(long step) {
  std::ostringstream name;
  name << "u_" << std::setw(8) << std::setfill('0') << step << ".nchf";
  return name.str();
}

void write_checkpoint(const std::filesystem::path& path, const SchemeState& state) {
  // Write to a temporary and rename so a crash never leaves half a checkpoint.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    auto out = open_out(tmp, std::ios::binary | std::ios::trunc);
    out.write("NCHK", 4);
    put<std::uint32_t>(out, 1);
    put<std::int64_t>(out, state.step_index);
    put<double>(out, state.time);
    put<std::uint8_t>(out, state.u_prev ? 1 : 0);
    write_field(out, state.u_curr, state.time);
    if (state.u_prev) write_field(out, *state.u_prev, state.time);
  }
  std::filesystem::rename(tmp, path);
}

SchemeState read_checkpoint(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_magic(in, "NCHK");
  const auto version = get<std::uint32_t>(in, "version");
  if (version != 1) throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto step = get<std::int64_t>(in, "step");
  const auto time = get<double>(in, "time");
  const auto has_prev = get<std::uint8_t>(in, "has_prev");
  Snapshot curr = read_field(in);
  SchemeState state{std::move(curr.field), std::nullopt, std::nullopt, static_cast<long>(step), time};
  if (has_prev) {
    Snapshot prev = read_field(in);
    require_same_geometry(prev.field.geometry(), state.u_curr.geometry(), "checkpoint");
    state.u_prev = std::move(prev.field);
  }
  return state;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string diagnostics_row(const DiagnosticsRecord& r) {
  std::string row;
  row += std::to_string(r.step);
  for (double v : {r.time, r.mass, r.energy}) row += ',' + format_double(v);
  row += ',';
  if (r.modified_energy) row += format_double(*r.modified_energy);
  for (double v : {r.increment_l2, r.increment_hneg1, r.grad_omega_l2, r.omega_variance}) {
    row += ',' + format_double(v);
  }
  row += ',' + std::to_string(r.newton_iters);
  return row;
}

DiagnosticsWriter::DiagnosticsWriter(const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_ = open_out(path, std::ios::app);
  if (fresh) out_ << kDiagnosticsHeader << '\n' << std::flush;
}

void DiagnosticsWriter::write(const DiagnosticsRecord& record) {
  out_ << diagnostics_row(record) << '\n' << std::flush;
  if (!out_) throw IoError("failed writing diagnostics row");
}

}  // namespace nch
