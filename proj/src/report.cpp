#include "eleuler/report.hpp"

#include "eleuler/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eleuler {

namespace {

using json = nlohmann::json;

constexpr double SweepRow::*kFields[] = {&SweepRow::time,           &SweepRow::energy,
                                        &SweepRow::u_hs,           &SweepRow::eta_hs,
                                        &SweepRow::div_residual,   &SweepRow::det_residual,
                                        &SweepRow::weber_residual, &SweepRow::classical_residual,
                                        &SweepRow::contraction_ratio};

std::size_t column_index(const std::string& name) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i)
    if (name == kCsvColumns[i]) return i;
  throw ConfigError("unknown CSV column '" + name + "'");
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) throw IoError("bad CSV number '" + text + "'");
  return v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

bool log_axis(const std::string& column) {
  return column.ends_with("_residual") || column == "contraction_ratio";
}

}  // namespace

std::string format_csv(const std::vector<SweepRow>& rows) {
  std::string out;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out += (i ? "," : "") + std::string(kCsvColumns[i]);
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out += (i ? "," : "") + number(row.*kFields[i]);
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  write_text(path, format_csv(rows));
}

std::vector<SweepRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::string header;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) header += (i ? "," : "") + std::string(kCsvColumns[i]);
  if (line != header) throw IoError(path.string() + ": unexpected CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    SweepRow row;
    std::size_t i = 0;
    for (; std::getline(ss, cell, ','); ++i) {
      if (i >= kCsvColumns.size()) throw IoError(path.string() + ": too many CSV cells");
      row.*kFields[i] = parse_number(cell);
    }
    if (i != kCsvColumns.size()) throw IoError(path.string() + ": too few CSV cells");
    rows.push_back(row);
  }
  return rows;
}

std::string svg_plot(const std::vector<SweepRow>& rows, const std::string& column) {
  const std::size_t col = column_index(column);
  const bool logy = log_axis(column);
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 30, B = 50;

  std::vector<std::pair<double, double>> pts;  // NaN y breaks the line
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& row : rows) {
    double y = row.*kFields[col];
    if (logy) y = y > 0.0 ? std::log10(y) : std::nan("");
    if (!std::isfinite(y)) y = std::nan("");
    pts.emplace_back(row.time, y);
    x0 = std::min(x0, row.time);
    x1 = std::max(x1, row.time);
    if (!std::isnan(y)) {
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (!(y1 > y0)) {
    const double pad = std::max(1e-12, std::abs(y0) * 1e-6);
    y0 -= pad;
    y1 += pad;
  }
  auto sx = [&](double x) { return L + (W - L - R) * (x - x0) / (x1 - x0); };
  auto sy = [&](double y) { return H - B - (H - T - B) * (y - y0) / (y1 - y0); };
  auto label = [&](double y) { return number(logy ? std::pow(10.0, y) : y).substr(0, 10); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\">" << column << (logy ? " (log scale)" : "") << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << number(x0).substr(0, 8) << "</text>\n";
  s << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << number(x1).substr(0, 8) << "</text>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">time</text>\n";
  s << "<text x=\"" << L - 6 << "\" y=\"" << sy(y0) << "\" text-anchor=\"end\">" << label(y0) << "</text>\n";
  s << "<text x=\"" << L - 6 << "\" y=\"" << sy(y1) + 4 << "\" text-anchor=\"end\">" << label(y1) << "</text>\n";
  std::string seg;
  auto flush = [&] {
    if (!seg.empty()) s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"" << seg << "\"/>\n";
    seg.clear();
  };
  char buf[64];
  for (const auto& [x, y] : pts) {
    if (std::isnan(y)) {
      flush();
      continue;
    }
    std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", seg.empty() ? "" : " ", sx(x), sy(y));
    seg += buf;
  }
  flush();
  s << "</svg>\n";
  return s.str();
}

void write_plots(const std::filesystem::path& dir, const std::vector<SweepRow>& rows) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 1; i < kCsvColumns.size(); ++i)
    write_text(dir / (std::string(kCsvColumns[i]) + ".svg"), svg_plot(rows, kCsvColumns[i]));
}

std::string constants_json(const ConstantsReport& r) {
  const TheoremConstants& c = r.constants;
  json j;
  j["constants"] = {{"C1", c.C1}, {"C2", c.C2}, {"C3", c.C3}, {"C3_prime", c.C3_prime}, {"C4", c.C4},
                    {"C5", c.C5}, {"C6", c.C6}, {"C_lip", c.C_lip}};
  j["provenance"] = c.provenance;
  j["safety_margin"] = kSafetyMargin;
  j["skew_max"] = r.skew_max;
  const Spectrum sp = r.settings.effective_spectrum();
  j["settings"] = {{"n", r.settings.dim},          {"N", r.settings.grid_n},
                   {"s", r.settings.s},            {"spectrum_decay", sp.decay},
                   {"spectrum_cutoff", sp.cutoff}, {"amplitude", r.settings.amplitude},
                   {"horizon", r.settings.horizon}, {"dt", r.settings.dt},
                   {"speed", r.settings.speed},    {"trials", r.trials},
                   {"seed", r.seed}};
  j["theorem"] = {{"M", r.M},
                  {"T", r.T},
                  {"u0_hs", r.u0_norm},
                  {"contraction_constant", r.theorem.contraction_constant},
                  {"ball_lhs", r.theorem.ball_lhs},
                  {"ball_condition", r.theorem.ball_condition}};
  json probes = json::array();
  for (const auto& p : r.probes) {
    json samples = json::array();
    for (const auto& s : p.samples)
      samples.push_back({{"seed", s.seed}, {"lhs", s.lhs}, {"rhs", s.rhs_without_constant}, {"ratio", s.ratio}});
    probes.push_back({{"lemma", to_string(p.lemma)},
                      {"max_ratio", p.max_ratio},
                      {"constant", p.constant},
                      {"spectrum", sp.describe()},
                      {"samples", std::move(samples)}});
  }
  j["probes"] = std::move(probes);
  return j.dump(2) + "\n";
}

void write_constants(const std::filesystem::path& path, const ConstantsReport& report) {
  write_text(path, constants_json(report));
}

TheoremConstants read_constants(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object() || !j.contains("constants") || !j["constants"].is_object())
    throw IoError(path.string() + ": missing \"constants\" object");
  const json& cj = j["constants"];
  TheoremConstants c;
  const std::pair<const char*, double*> keys[] = {{"C1", &c.C1}, {"C2", &c.C2}, {"C3", &c.C3},
                                                  {"C3_prime", &c.C3_prime}, {"C4", &c.C4}, {"C5", &c.C5},
                                                  {"C6", &c.C6}, {"C_lip", &c.C_lip}};
  for (const auto& [key, dst] : keys) {
    if (!cj.contains(key) || !cj[key].is_number()) throw IoError(path.string() + ": constant " + key + " missing");
    *dst = cj[key].get<double>();
    if (!std::isfinite(*dst) || *dst < 0.0) throw IoError(path.string() + ": constant " + key + " is not a nonnegative number");
  }
  if (j.contains("provenance") && j["provenance"].is_string()) c.provenance = j["provenance"].get<std::string>();
  return c;
}

}  // namespace eleuler
