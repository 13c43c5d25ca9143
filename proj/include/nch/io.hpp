#pragma once

// Field snapshots ("NCHF"), checkpoints ("NCHK") and the diagnostics CSV.
//
// NCHF: magic "NCHF", u32 N, f64 L, f64 t, then N*N f64 values row-major,
// all little-endian.
// NCHK: magic "NCHK", u32 version, i64 step, f64 time, u8 has_prev, then
// u_curr and (if has_prev) u_prev as NCHF records.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>

#include "nch/driver.hpp"
#include "nch/errors.hpp"
#include "nch/field.hpp"

namespace nch {

struct Snapshot {
  Field field;
  double time = 0.0;
};

void write_field(std::ostream& out, const Field& field, double time);
Snapshot read_field(std::istream& in);
void write_field(const std::filesystem::path& path, const Field& field, double time);
Snapshot read_field(const std::filesystem::path& path);

/// Columns i, j, x, y, value (0-based indices, cell-center coordinates).
void write_field_csv(const std::filesystem::path& path, const Field& field);

/// "u_00000042.nchf"
std::string snapshot_name(long step);

void write_checkpoint(const std::filesystem::path& path, const SchemeState& state);
SchemeState read_checkpoint(const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

inline constexpr const char* kDiagnosticsHeader =
    "step,time,mass,energy,modified_energy,increment_l2,increment_hneg1,grad_omega_l2,"
    "omega_variance,newton_iters";

std::string diagnostics_row(const DiagnosticsRecord& record);

/// Appends rows to a CSV file, writing the header when the file is new or
/// empty. Rows are flushed as they are written.
class DiagnosticsWriter {
 public:
  explicit DiagnosticsWriter(const std::filesystem::path& path);
  void write(const DiagnosticsRecord& record);

 private:
  std::ofstream out_;
};

}  // namespace nch
