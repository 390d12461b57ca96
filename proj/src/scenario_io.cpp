#include <fstream>
#include <sstream>

#include "json_fields.hpp"
#include "ugvbs/scenario.hpp"

namespace ugvbs {

using detail::json;

namespace {

json points_to_json(const std::vector<Point2> &pts) {
  json a = json::array();
  for (const auto &p : pts)
    a.push_back(json::array({p.x, p.y}));
  return a;
}

std::vector<Point2> points_from_json(const json &j, const std::string &path) {
  if (!j.is_array())
    detail::field_error(path, "expected an array of [x, y] pairs");
  std::vector<Point2> pts(j.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto p = detail::child(path, i);
    if (!j[i].is_array() || j[i].size() != 2)
      detail::field_error(p, "expected [x, y]");
    pts[i].x = detail::number_from_json(j[i][0], detail::child(p, 0));
    pts[i].y = detail::number_from_json(j[i][1], detail::child(p, 1));
  }
  return pts;
}

} // namespace

std::string scenario_to_json(const Scenario &s) {
  json doc;
  doc["schema_version"] = kScenarioSchemaVersion;
  doc["seed"] = s.seed ? json(*s.seed) : json(nullptr);
  doc["params"] = detail::params_to_json(s.params);
  doc["channel_cfg"] = json{{"pathloss_rho0", s.channel_cfg.pathloss_rho0},
                            {"ref_d0", s.channel_cfg.ref_d0},
                            {"exponent", s.channel_cfg.exponent},
                            {"fading", to_string(s.channel_cfg.fading)}};
  doc["positions"] = json{{"vertices", points_to_json(s.vertex_positions)},
                          {"users", points_to_json(s.user_positions)}};
  doc["dist_D"] = detail::matrix_to_json(s.dist_D);
  doc["gain_gh_sq"] = detail::matrix_to_json(s.gain_gh_sq);
  doc["demand_gamma"] = detail::vector_to_json(s.demand_gamma);
  return doc.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("malformed scenario document: ") + e.what());
  }

  const auto &version = detail::member(doc, "schema_version", "");
  if (!version.is_number_integer())
    detail::field_error("schema_version", "expected an integer");
  if (version.get<int>() != kScenarioSchemaVersion)
    detail::field_error("schema_version", "unsupported version " + version.dump() +
                                              " (expected " +
                                              std::to_string(kScenarioSchemaVersion) + ")");

  Scenario s;
  if (auto it = doc.find("seed"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_unsigned())
      detail::field_error("seed", "expected an unsigned integer or null");
    s.seed = it->get<std::uint64_t>();
  }

  const auto &p = detail::member(doc, "params", "");
  s.params.alpha1 = detail::number_field(p, "alpha1", "params");
  s.params.alpha2 = detail::number_field(p, "alpha2", "params");
  s.params.speed_a = detail::number_field(p, "speed_a", "params");
  s.params.eta = detail::number_field(p, "eta", "params");
  s.params.beta = detail::number_field(p, "beta", "params");
  s.params.noise_N0 = detail::number_field(p, "noise_N0_W", "params");
  s.params.horizon_T = detail::number_field(p, "horizon_T", "params");

  const auto &c = detail::member(doc, "channel_cfg", "");
  s.channel_cfg.pathloss_rho0 = detail::number_field(c, "pathloss_rho0", "channel_cfg");
  s.channel_cfg.ref_d0 = detail::number_field(c, "ref_d0", "channel_cfg");
  s.channel_cfg.exponent = detail::number_field(c, "exponent", "channel_cfg");
  const auto &fading = detail::member(c, "fading", "channel_cfg");
  if (!fading.is_string())
    detail::field_error("channel_cfg.fading", "expected \"rayleigh\" or \"none\"");
  try {
    s.channel_cfg.fading = fading_from_string(fading.get<std::string>());
  } catch (const ValidationError &e) {
    detail::field_error("channel_cfg.fading", e.what());
  }

  const auto &pos = detail::member(doc, "positions", "");
  s.vertex_positions = points_from_json(detail::member(pos, "vertices", "positions"),
                                        "positions.vertices");
  s.user_positions = points_from_json(detail::member(pos, "users", "positions"),
                                      "positions.users");
  s.dist_D = detail::matrix_from_json(detail::member(doc, "dist_D", ""), "dist_D");
  s.gain_gh_sq = detail::matrix_from_json(detail::member(doc, "gain_gh_sq", ""), "gain_gh_sq");
  s.demand_gamma =
      detail::vector_from_json(detail::member(doc, "demand_gamma", ""), "demand_gamma");

  s.validate();
  return s;
}

void save_scenario(const Scenario &s, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << scenario_to_json(s);
  if (!out)
    throw std::runtime_error("failed writing '" + path.string() + "'");
}

Scenario load_scenario(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

} // namespace ugvbs
