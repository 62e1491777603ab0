#pragma once

#include "eleuler/diagnostics.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace eleuler {

inline constexpr std::array<const char*, 9> kCsvColumns = {
    "time",           "energy",         "u_hs",
    "eta_hs",         "div_residual",   "det_residual",
    "weber_residual", "classical_residual", "contraction_ratio"};

/// Header line plus one row per sample; values in %.17g, missing values "nan".
std::string format_csv(const std::vector<SweepRow>& rows);
void write_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
/// Parses a file written by write_csv; the header must match exactly.
std::vector<SweepRow> read_csv(const std::filesystem::path& path);

/// Line plot of one column against time. Residual columns use a log axis.
std::string svg_plot(const std::vector<SweepRow>& rows, const std::string& column);
/// One `<column>.svg` per non-time column in dir.
void write_plots(const std::filesystem::path& dir, const std::vector<SweepRow>& rows);

std::string constants_json(const ConstantsReport& report);
void write_constants(const std::filesystem::path& path, const ConstantsReport& report);
/// Reads the constants block of a report; every constant must be a finite,
/// nonnegative number. Throws IoError on malformed input.
TheoremConstants read_constants(const std::filesystem::path& path);

}  // namespace eleuler
