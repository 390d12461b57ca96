// Field access helpers for the JSON documents. Every failure is reported as a
// ParseError naming the dotted path of the offending field.

#ifndef UGVBS_SRC_JSON_FIELDS_HPP
#define UGVBS_SRC_JSON_FIELDS_HPP

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "ugvbs/scenario.hpp"

namespace ugvbs::detail {

using nlohmann::json;

[[noreturn]] inline void field_error(const std::string &path, const std::string &what) {
  throw ParseError("field '" + path + "': " + what);
}

inline const json &member(const json &obj, const std::string &key, const std::string &path) {
  if (!obj.is_object())
    field_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    field_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline std::string child(const std::string &path, const std::string &key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string child(const std::string &path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

/// Non-finite doubles travel as the strings "inf", "-inf".
inline json number_to_json(double x) {
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  if (std::isnan(x))
    return "nan";
  return x;
}

inline double number_from_json(const json &j, const std::string &path) {
  if (j.is_number())
    return j.get<double>();
  if (j.is_string()) {
    const auto &s = j.get_ref<const std::string &>();
    if (s == "inf")
      return kInf;
    if (s == "-inf")
      return -kInf;
  }
  field_error(path, "expected a number");
}

inline double number_field(const json &obj, const std::string &key, const std::string &path) {
  return number_from_json(member(obj, key, path), child(path, key));
}

inline json matrix_to_json(const Matrix &m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c)
      row.push_back(number_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json &j, const std::string &path) {
  if (!j.is_array())
    field_error(path, "expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j.front().size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row_path = child(path, r);
    if (!j[r].is_array())
      field_error(row_path, "expected an array");
    if (j[r].size() != cols)
      field_error(row_path, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = number_from_json(j[r][c], child(row_path, c));
  }
  return m;
}

inline std::vector<double> vector_from_json(const json &j, const std::string &path) {
  if (!j.is_array())
    field_error(path, "expected an array");
  std::vector<double> v(j.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = number_from_json(j[i], child(path, i));
  return v;
}

inline json vector_to_json(const std::vector<double> &v) {
  json a = json::array();
  for (double x : v)
    a.push_back(number_to_json(x));
  return a;
}

inline json params_to_json(const PhysicalParams &p) {
  return json{{"alpha1", p.alpha1},
              {"alpha2", p.alpha2},
              {"speed_a", p.speed_a},
              {"eta", p.eta},
              {"beta", p.beta},
              {"noise_N0_W", p.noise_N0},
              {"noise_N0_dBm", watt_to_dbm(p.noise_N0)},
              {"horizon_T", p.horizon_T}};
}

} // namespace ugvbs::detail

#endif // UGVBS_SRC_JSON_FIELDS_HPP
