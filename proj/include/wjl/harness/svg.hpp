#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wjl/detail/format.hpp"
#include "wjl/error.hpp"
#include "wjl/harness/csv.hpp"

namespace wjl::harness {

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  if (ec != std::errc{}) throw Error("svg: number formatting failed");
  std::string s(buf, ptr);
  return s == "-0.00" ? "0.00" : s;
}

inline std::string general6(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  if (ec != std::errc{}) throw Error("svg: number formatting failed");
  return {buf, ptr};
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Equal-width bin counts over [min, max]. A degenerate range (all values
/// equal) yields one bin holding every value.
inline std::vector<std::size_t> histogram_counts(std::span<const double> values, std::size_t bins, double& lo,
                                                 double& hi) {
  if (values.empty()) throw InvalidArgument("histogram: no data");
  if (bins == 0) throw InvalidArgument("histogram: bins must be positive");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  lo = *mn;
  hi = *mx;
  if (lo == hi) return {values.size()};
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)] += 1;
  }
  return counts;
}

/// A 640x480 SVG histogram, bar heights normalized to the tallest bar, with an
/// optional vertical reference line. Output depends only on the inputs.
inline std::string histogram_svg(std::span<const double> values, std::size_t bins, std::optional<double> reference,
                                 std::string_view title) {
  constexpr double kWidth = 640, kHeight = 480;
  constexpr double kLeft = 60, kRight = 620, kTop = 40, kBottom = 420;
  constexpr double kPlotW = kRight - kLeft, kPlotH = kBottom - kTop;

  double lo = 0, hi = 0;
  const auto counts = histogram_counts(values, bins, lo, hi);
  const std::size_t tallest = *std::max_element(counts.begin(), counts.end());
  const double bar_w = kPlotW / static_cast<double>(counts.size());

  using detail::fixed2;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + fixed2(kWidth) + "\" height=\"" + fixed2(kHeight) + "\" fill=\"white\"/>\n";
  s += "<text x=\"320.00\" y=\"24.00\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
       detail::xml_escape(title) + "</text>\n";
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const double h = kPlotH * static_cast<double>(counts[b]) / static_cast<double>(tallest);
    s += "<rect x=\"" + fixed2(kLeft + bar_w * static_cast<double>(b)) + "\" y=\"" + fixed2(kBottom - h) +
         "\" width=\"" + fixed2(bar_w) + "\" height=\"" + fixed2(h) +
         "\" fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  s += "<line x1=\"" + fixed2(kLeft) + "\" y1=\"" + fixed2(kBottom) + "\" x2=\"" + fixed2(kRight) + "\" y2=\"" +
       fixed2(kBottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fixed2(kLeft) + "\" y1=\"" + fixed2(kTop) + "\" x2=\"" + fixed2(kLeft) + "\" y2=\"" +
       fixed2(kBottom) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + fixed2(kLeft) + "\" y=\"440.00\" text-anchor=\"start\" font-family=\"sans-serif\" "
       "font-size=\"11\">" + detail::general6(lo) + "</text>\n";
  s += "<text x=\"" + fixed2(kRight) + "\" y=\"440.00\" text-anchor=\"end\" font-family=\"sans-serif\" "
       "font-size=\"11\">" + detail::general6(hi) + "</text>\n";
  s += "<text x=\"54.00\" y=\"" + fixed2(kTop + 4) + "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       "font-size=\"11\">" + std::to_string(tallest) + "</text>\n";
  s += "<text x=\"320.00\" y=\"465.00\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">n = " +
       std::to_string(values.size()) + ", bins = " + std::to_string(counts.size()) + "</text>\n";
  if (reference && std::isfinite(*reference)) {
    const double x = lo == hi ? kLeft + kPlotW / 2 : kLeft + kPlotW * (*reference - lo) / (hi - lo);
    if (x >= kLeft && x <= kRight)
      s += "<line x1=\"" + fixed2(x) + "\" y1=\"" + fixed2(kTop) + "\" x2=\"" + fixed2(x) + "\" y2=\"" +
           fixed2(kBottom) + "\" stroke=\"crimson\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

/// `column = value` row selector for multi-arm CSVs.
struct RowFilter {
  std::string column;
  std::string value;
};

/// Histogram of one numeric column of an experiment CSV.
///
/// The reference line comes from the metadata: `reference[column]`, or
/// `arm_reference[arm][column]` when a filter pins the `arm` column.
inline std::string render_histogram_svg(const CsvTable& table, const std::string& column, std::size_t bins,
                                        std::span<const RowFilter> filters = {}) {
  const std::size_t col = table.column_index(column);
  std::vector<std::size_t> filter_cols;
  for (const auto& f : filters) filter_cols.push_back(table.column_index(f.column));
  std::vector<double> values;
  for (const auto& row : table.rows) {
    bool keep = true;
    for (std::size_t i = 0; i < filters.size(); ++i) keep = keep && row[filter_cols[i]] == filters[i].value;
    if (!keep) continue;
    if (row[col].empty()) continue;
    try {
      values.push_back(wjl::detail::parse_double(row[col]));
    } catch (const InvalidArgument&) {
      throw InvalidArgument("histogram: column \"" + column + "\" is not numeric (\"" + row[col] + "\")");
    }
  }
  if (values.empty()) throw InvalidArgument("histogram: no data rows selected");

  std::optional<double> reference;
  const auto& meta = table.metadata;
  if (meta.is_object()) {
    if (meta.contains("reference") && meta["reference"].contains(column) && meta["reference"][column].is_number())
      reference = meta["reference"][column].get<double>();
    for (const auto& f : filters) {
      if (f.column == "arm" && meta.contains("arm_reference") && meta["arm_reference"].contains(f.value) &&
          meta["arm_reference"][f.value].contains(column) && meta["arm_reference"][f.value][column].is_number())
        reference = meta["arm_reference"][f.value][column].get<double>();
    }
  }
  std::string title = column;
  for (const auto& f : filters) title += "  " + f.column + "=" + f.value;
  return histogram_svg(values, bins, reference, title);
}

inline void render_histogram(const std::filesystem::path& csv_in, const std::string& column, std::size_t bins,
                             const std::filesystem::path& svg_out, std::span<const RowFilter> filters = {}) {
  write_file(svg_out, render_histogram_svg(read_csv_file(csv_in), column, bins, filters));
}

}  // namespace wjl::harness
