#include "csmooth/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace csmooth::io {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ContractError("not an unsigned integer: '" + s + "'");
  return v;
}

bool getline_nocr(std::istream& is, std::string& line) {
  if (!std::getline(is, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericError("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ContractError("not a number: '" + s + "'");
  return v;
}

void write_series_csv(std::ostream& os, const Matrix& columns, const std::vector<double>& times,
                      const std::string& prefix) {
  if (times.size() != static_cast<std::size_t>(columns.cols())) {
    throw ContractError("write_series_csv: time grid length does not match the series");
  }
  os << "k,t";
  for (Eigen::Index i = 0; i < columns.rows(); ++i) os << ',' << prefix << (i + 1);
  os << '\n';
  for (Eigen::Index k = 0; k < columns.cols(); ++k) {
    os << (k + 1) << ',' << format_double(times[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < columns.rows(); ++i) os << ',' << format_double(columns(i, k));
    os << '\n';
  }
}

SeriesTable read_series_csv(std::istream& is) {
  std::string line;
  if (!getline_nocr(is, line)) throw ContractError("read_series_csv: empty input");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "k" || header[1] != "t") {
    throw ContractError("read_series_csv: expected header 'k,t,<values>'");
  }
  const std::size_t dim = header.size() - 2;
  std::vector<std::vector<double>> rows;
  SeriesTable out;
  while (getline_nocr(is, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ContractError("read_series_csv: row " + std::to_string(rows.size() + 1) +
                          " has the wrong number of columns");
    }
    if (parse_size(trim(cells[0])) != rows.size() + 1) {
      throw ContractError("read_series_csv: step index out of sequence");
    }
    out.times.push_back(parse_double(cells[1]));
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < dim; ++i) row[i] = parse_double(cells[i + 2]);
    rows.push_back(std::move(row));
  }
  out.values.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t i = 0; i < dim; ++i)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[k][i];
  return out;
}

void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace, bool with_timing) {
  os << "iter,theta,max_ineq,max_eq,step_norm,wall_ms\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    os << (k + 1) << ',' << format_double(trace.theta[k]) << ','
       << format_double(trace.max_ineq[k]) << ',' << format_double(trace.max_eq[k]) << ','
       << format_double(trace.step_norm[k]) << ','
       << format_double(with_timing ? trace.wall_seconds[k] * 1e3 : 0.0) << '\n';
  }
}

ConvergenceTrace read_trace_csv(std::istream& is) {
  std::string line;
  if (!getline_nocr(is, line) || line != "iter,theta,max_ineq,max_eq,step_norm,wall_ms") {
    throw ContractError("read_trace_csv: unexpected header");
  }
  ConvergenceTrace out;
  while (getline_nocr(is, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) throw ContractError("read_trace_csv: expected 6 columns");
    if (parse_size(trim(cells[0])) != out.size() + 1) {
      throw ContractError("read_trace_csv: iteration index out of sequence");
    }
    out.theta.push_back(parse_double(cells[1]));
    out.max_ineq.push_back(parse_double(cells[2]));
    out.max_eq.push_back(parse_double(cells[3]));
    out.step_norm.push_back(parse_double(cells[4]));
    out.wall_seconds.push_back(parse_double(cells[5]) / 1e3);
  }
  return out;
}

void write_scaling_csv(std::ostream& os, const std::vector<ship::ScalingRow>& rows) {
  os << "T,solver,repeats,mean_seconds,mean_outer_iterations,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& c : status) {
      if (c == ',' || c == '\n') c = ' ';
    }
    os << r.steps << ',' << r.solver << ',' << r.repeats << ',' << format_double(r.mean_seconds)
       << ',' << format_double(r.mean_outer_iterations) << ',' << status << '\n';
  }
}

KeyValues read_key_values(std::istream& is) {
  KeyValues out;
  std::string line;
  std::size_t lineno = 0;
  while (getline_nocr(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void write_key_values(std::ostream& os, const KeyValues& kv) {
  for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
}

KeyValues to_key_values(const ship::ShipExperimentConfig& cfg) {
  return {
      {"T", std::to_string(cfg.steps)},
      {"dt", format_double(cfg.dt())},
      {"time_grid", "t_k = k*dt, k = 1..T"},
      {"tau", format_double(cfg.tau)},
      {"method", std::string(to_string(cfg.method))},
      {"rho1", format_double(cfg.params.rho1)},
      {"rho2", format_double(cfg.params.rho2)},
      {"alpha1", format_double(cfg.params.alpha1)},
      {"alpha2", format_double(cfg.params.alpha2)},
      {"M", std::to_string(cfg.params.sbm_inner)},
      {"max_outer", std::to_string(cfg.max_outer)},
      {"max_inner", std::to_string(cfg.inner.max_inner)},
      {"tol_inner", format_double(cfg.inner.tol_inner)},
      {"prior_var", format_double(cfg.prior_var)},
      {"seed", std::to_string(cfg.seed)},
  };
}

ship::ShipExperimentConfig config_from_key_values(const KeyValues& kv) {
  ship::ShipExperimentConfig cfg;
  const auto get = [&kv](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("T")) cfg.steps = parse_size(*v);
  if (auto* v = get("tau")) cfg.tau = parse_double(*v);
  if (auto* v = get("method")) cfg.method = parse_method(*v);
  if (auto* v = get("rho1")) cfg.params.rho1 = parse_double(*v);
  if (auto* v = get("rho2")) cfg.params.rho2 = parse_double(*v);
  if (auto* v = get("alpha1")) cfg.params.alpha1 = parse_double(*v);
  if (auto* v = get("alpha2")) cfg.params.alpha2 = parse_double(*v);
  if (auto* v = get("M")) cfg.params.sbm_inner = parse_size(*v);
  if (auto* v = get("max_outer")) cfg.max_outer = parse_size(*v);
  if (auto* v = get("max_inner")) cfg.inner.max_inner = parse_size(*v);
  if (auto* v = get("tol_inner")) cfg.inner.tol_inner = parse_double(*v);
  if (auto* v = get("prior_var")) cfg.prior_var = parse_double(*v);
  if (auto* v = get("seed")) cfg.seed = parse_size(*v);
  cfg.validate();
  return cfg;
}

std::vector<double> time_grid(const ship::ShipExperimentConfig& cfg) {
  std::vector<double> out(cfg.steps);
  for (std::size_t k = 0; k < cfg.steps; ++k) out[k] = cfg.time(k);
  return out;
}

}  // namespace csmooth::io
