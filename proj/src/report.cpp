#include "pdd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pdd {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
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

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string csv_text(const Trajectory& traj) {
  std::string out = "iter,f,grad_norm,lyapunov,dist_to_min\n";
  for (const Record& r : traj.records) {
    out += std::to_string(r.iter) + ',' + fmt(r.f) + ',' + fmt(r.grad_norm) + ',' + fmt(r.lyapunov) + ',';
    if (r.dist_to_min) out += fmt(*r.dist_to_min);
    out += '\n';
  }
  return out;
}

void emit_csv(const Trajectory& traj, const std::string& path) {
  if (traj.records.empty()) throw std::invalid_argument("emit_csv: trajectory has no records");
  write_text_file(path, csv_text(traj));
}

std::vector<Record> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "iter,f,grad_norm,lyapunov,dist_to_min") {
    throw std::invalid_argument("parse_csv: unexpected header");
  }
  std::vector<Record> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 5) throw std::invalid_argument("parse_csv: expected 5 columns in '" + line + "'");
    Record r;
    r.iter = std::stol(cells[0]);
    r.f = std::stod(cells[1]);
    r.grad_norm = std::stod(cells[2]);
    r.lyapunov = std::stod(cells[3]);
    if (!cells[4].empty()) r.dist_to_min = std::stod(cells[4]);
    out.push_back(r);
  }
  return out;
}

std::string svg_text(const std::vector<Series>& series, const std::string& x_label, const std::string& y_label) {
  if (series.empty()) throw std::invalid_argument("svg: no series");
  const double W = 720, H = 480, left = 80, right = 180, top = 30, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
      if (!(s.xs[i] > 0.0 && s.ys[i] > 0.0) || !std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      xmin = std::min(xmin, std::log10(s.xs[i]));
      xmax = std::max(xmax, std::log10(s.xs[i]));
      ymin = std::min(ymin, std::log10(s.ys[i]));
      ymax = std::max(ymax, std::log10(s.ys[i]));
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  xmin = std::floor(xmin), xmax = std::max(std::ceil(xmax), xmin + 1);
  ymin = std::floor(ymin), ymax = std::max(std::ceil(ymax), ymin + 1);
  auto px = [&](double lx) { return left + pw * (lx - xmin) / (xmax - xmin); };
  auto py = [&](double ly) { return top + ph * (1.0 - (ly - ymin) / (ymax - ymin)); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
    << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const int ystep = static_cast<int>(std::ceil((ymax - ymin) / 10.0));
  for (double e = ymin; e <= ymax; e += ystep) {
    o << "<line x1=\"" << left << "\" y1=\"" << fmt_short(py(e)) << "\" x2=\"" << left + pw << "\" y2=\""
      << fmt_short(py(e)) << "\" stroke=\"#dddddd\"/>\n"
      << "<text x=\"" << left - 6 << "\" y=\"" << fmt_short(py(e) + 4) << "\" text-anchor=\"end\">1e"
      << static_cast<int>(e) << "</text>\n";
  }
  const int xstep = static_cast<int>(std::ceil((xmax - xmin) / 8.0));
  for (double e = xmin; e <= xmax; e += xstep) {
    o << "<line x1=\"" << fmt_short(px(e)) << "\" y1=\"" << top << "\" x2=\"" << fmt_short(px(e)) << "\" y2=\""
      << top + ph << "\" stroke=\"#dddddd\"/>\n"
      << "<text x=\"" << fmt_short(px(e)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">1e"
      << static_cast<int>(e) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xml_escape(x_label)
    << "</text>\n"
    << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << top + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
      if (!(s.xs[i] > 0.0 && s.ys[i] > 0.0) || !std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      if (!first) o << ' ';
      o << fmt_short(px(std::log10(s.xs[i]))) << ',' << fmt_short(py(std::log10(s.ys[i])));
      first = false;
    }
    o << "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(k);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void emit_svg(const std::vector<std::pair<std::string, const Trajectory*>>& trajs, const std::string& path) {
  if (trajs.empty()) throw std::invalid_argument("emit_svg: no trajectories");
  std::vector<Series> series;
  for (const auto& [label, traj] : trajs) {
    Series s{label, {}, {}};
    for (const Record& r : traj->records) {
      s.xs.push_back(static_cast<double>(r.iter + 1));
      s.ys.push_back(r.grad_norm);
    }
    series.push_back(std::move(s));
  }
  write_text_file(path, svg_text(series, "iteration + 1", "|grad f|"));
}

}  // namespace pdd
