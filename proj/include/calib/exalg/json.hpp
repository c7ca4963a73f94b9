#pragma once

#include <json.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include "calib/exalg/endo.hpp"

namespace calib {

using json = nlohmann::json;

namespace detail {
inline double re_of(double c) { return c; }
inline double im_of(double) { return 0.0; }
inline double re_of(const Complexd& c) { return c.real(); }
inline double im_of(const Complexd& c) { return c.imag(); }
inline double re_of(const Rational& c) { return c.get_d(); }
inline double im_of(const Rational&) { return 0.0; }
inline double re_of(const ComplexQ& c) { return c.re.get_d(); }
inline double im_of(const ComplexQ& c) { return c.im.get_d(); }
}  // namespace detail

// JSON indices are 1-based.
template <class S>
json form_terms_json(const Form<S>& f) {
  json terms = json::array();
  for (const auto& [m, c] : f.terms()) {
    json idx = json::array();
    for (int i : mask_indices(m)) idx.push_back(i + 1);
    terms.push_back({{"idx", idx}, {"re", detail::re_of(c)}, {"im", detail::im_of(c)}});
  }
  return terms;
}

template <class S>
json to_json(const MultiForm<S>& a) {
  json parts = json::array();
  for (const auto& p : a.parts()) parts.push_back({{"degree", p.degree()}, {"terms", form_terms_json(p)}});
  return {{"dim", a.dim()}, {"scalar", ScalarTraits<S>::is_complex ? "complex" : "real"}, {"parts", parts}};
}

/// Parse a MultiForm; always returns complex coefficients (real inputs have zero imaginary part).
inline MultiForm<Complexd> multiform_from_json(const json& j) {
  int n = j.at("dim").get<int>();
  if (n <= 0 || n > kMaxDim) throw std::invalid_argument("multiform json: bad dim");
  std::string scalar = j.value("scalar", "real");
  if (scalar != "real" && scalar != "complex") throw std::invalid_argument("multiform json: bad scalar kind");
  std::vector<Form<Complexd>> parts;
  for (const auto& pj : j.at("parts")) {
    int p = pj.at("degree").get<int>();
    Form<Complexd> f(n, p);
    for (const auto& t : pj.at("terms")) {
      std::vector<int> idx;
      for (const auto& i : t.at("idx")) idx.push_back(i.get<int>() - 1);
      if (static_cast<int>(idx.size()) != p) throw std::invalid_argument("multiform json: term degree mismatch");
      double re = t.value("re", 0.0), im = t.value("im", 0.0);
      if (scalar == "real" && im != 0.0) throw std::invalid_argument("multiform json: imaginary part on real form");
      f.add(mask_from_indices(idx, n), Complexd(re, im));
    }
    parts.push_back(std::move(f));
  }
  if (parts.empty()) throw std::invalid_argument("multiform json: no parts");
  return MultiForm<Complexd>(std::move(parts));
}

inline MultiForm<double> real_part(const MultiForm<Complexd>& a) {
  return a.map([](const Complexd& c) { return c.real(); });
}

template <class S>
json to_json(const Endo<S>& e) {
  json rows = json::array();
  for (int i = 0; i < e.dim(); ++i) {
    json row = json::array();
    for (int j = 0; j < e.dim(); ++j) row.push_back(detail::re_of(e(i, j)));
    rows.push_back(row);
  }
  return {{"dim", e.dim()}, {"rows", rows}};
}

inline Endo<double> endo_from_json(const json& j) {
  int n = j.at("dim").get<int>();
  Endo<double> e(n);
  const auto& rows = j.at("rows");
  if (static_cast<int>(rows.size()) != n) throw std::invalid_argument("endo json: row count");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) throw std::invalid_argument("endo json: row length");
    for (int k = 0; k < n; ++k) e(i, k) = rows[i][k].get<double>();
  }
  return e;
}

}  // namespace calib
