#pragma once

/**
 * @file io.hpp
 * @brief CSV and JSON emission with fixed 17-significant-digit formatting.
 */

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>

#include "thermoevo/errors.hpp"
#include "thermoevo/evolution.hpp"
#include "thermoevo/rational.hpp"
#include "thermoevo/signal.hpp"
#include "thermoevo/wellposedness.hpp"

namespace thermoevo {

using Json = nlohmann::ordered_json;

/// printf("%.17g"); non-finite values become inf, -inf, nan.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' '), end_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(k).dump() << ": ";
        write_json(os, v, indent, depth + 1);
      }
      os << '\n' << end_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // arrays of scalars stay on one line
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write_json(os, j[i], indent, depth + 1);
        }
        os << ']';
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_json(os, j[i], indent, depth + 1);
      }
      os << '\n' << end_pad << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      os << (std::isfinite(x) ? format_double(x) : '"' + format_double(x) + '"');
      return;
    }
    default: os << j.dump();
  }
}

}  // namespace detail

/// Deterministic JSON text: two-space indent, insertion-ordered keys, %.17g floats, non-finite floats as strings.
inline void write_json(std::ostream& os, const Json& j) {
  detail::write_json(os, j, 2, 0);
  os << '\n';
}

inline std::string to_json_text(const Json& j) {
  std::ostringstream os;
  write_json(os, j);
  return os.str();
}

inline Json complex_to_json(cplx c) { return c.imag() == 0.0 ? Json(c.real()) : Json::array({c.real(), c.imag()}); }

inline cplx complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  throw InvalidInput("expected a number or a [re, im] pair");
}

/// {"num": [[..matrix rows..], ...], "den": [c0, c1, ...]}, ascending powers of z.
inline Json rational_to_json(const RationalMatrixFunction& r) {
  Json num = Json::array();
  for (const auto& m : r.numerator()) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      Json row = Json::array();
      for (Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
      rows.push_back(row);
    }
    num.push_back(rows);
  }
  Json den = Json::array();
  for (const auto& c : r.denominator()) den.push_back(complex_to_json(c));
  return Json{{"num", num}, {"den", den}};
}

/// Also accepts scalar shorthand: "num": [n0, n1, ...].
inline RationalMatrixFunction rational_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("rational function must be an object with 'num' and 'den'");
  for (const auto& [k, v] : j.items())
    if (k != "num" && k != "den") throw InvalidInput("unknown key '" + k + "' in rational function");
  if (!j.contains("num") || !j.contains("den") || !j["num"].is_array() || !j["den"].is_array() || j["num"].empty())
    throw InvalidInput("rational function needs nonempty arrays 'num' and 'den'");
  std::vector<Eigen::MatrixXcd> num;
  for (const auto& m : j["num"]) {
    if (!m.is_array()) {
      num.push_back(Eigen::MatrixXcd::Constant(1, 1, complex_from_json(m)));
      continue;
    }
    if (m.empty() || !m[0].is_array()) throw InvalidInput("rational numerator coefficients must be numbers or matrices");
    const Index rows = static_cast<Index>(m.size()), cols = static_cast<Index>(m[0].size());
    Eigen::MatrixXcd c(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      if (!m[static_cast<std::size_t>(i)].is_array() || static_cast<Index>(m[static_cast<std::size_t>(i)].size()) != cols)
        throw InvalidInput("ragged numerator matrix");
      for (Index k = 0; k < cols; ++k) c(i, k) = complex_from_json(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
    }
    num.push_back(c);
  }
  std::vector<cplx> den;
  for (const auto& c : j["den"]) den.push_back(complex_from_json(c));
  return {num, den};
}

/// Fields exactly: verdict, c_estimate, rho_min, classification, witnesses, checks_run.
inline Json report_to_json(const WellPosednessReport& r) {
  Json w = Json::array();
  for (const auto& x : r.witnesses) {
    Json v = Json::array();
    for (Index i = 0; i < x.eigenvector.size(); ++i) v.push_back(complex_to_json(x.eigenvector(i)));
    w.push_back(Json{{"cell", x.cell}, {"eigenvalue", x.eigenvalue}, {"eigenvector", v}});
  }
  return Json{{"verdict", std::string(to_string(r.verdict))},
              {"c_estimate", r.c_estimate},
              {"rho_min", r.rho_min},
              {"classification", std::string(to_string(r.classification))},
              {"witnesses", w},
              {"checks_run", r.checks_run}};
}

/// Header `t,component_0,...`, one row per grid point.
inline void write_signal_csv(std::ostream& os, const WeightedSignal& s, const std::string& prefix = "component_") {
  os << 't';
  for (Index c = 0; c < s.components(); ++c) os << ',' << prefix << c;
  os << '\n';
  for (Index i = 0; i < s.size(); ++i) {
    os << format_double(s.time(i));
    for (Index c = 0; c < s.components(); ++c) os << ',' << format_double(s.samples()(i, c));
    os << '\n';
  }
}

/// Trajectory field export with columns `t, x_0, ..., x_{m-1}`.
inline void write_field_csv(std::ostream& os, const WeightedSignal& field) { write_signal_csv(os, field, "x_"); }

inline void write_energy_csv(std::ostream& os, const Trajectory& tr, const Eigen::VectorXd& e) {
  os << "t,E\n";
  for (Index n = 0; n < e.size(); ++n) os << format_double(tr.time(n)) << ',' << format_double(e(n)) << '\n';
}

inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  body(f);
  f.flush();
  if (!f) throw IoError("failed writing '" + path + "'");
}

}  // namespace thermoevo
