#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "palasso/error.hpp"

namespace palasso::cli {

using nlohmann::json;

TauValue parse_tau(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  TauValue t;
  t.per_observation = !s.empty() && (s.back() == 'N' || s.back() == 'n');
  if (t.per_observation) s.remove_suffix(1);
  if (!s.empty() && s.back() == '*') s.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), t.value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !(t.value > 0.0)) {
    throw ConfigError("bad tau '" + std::string(text) + "' (expected e.g. 12.5 or 0.025N)");
  }
  return t;
}

std::vector<TauValue> parse_tau_grid(std::string_view text) {
  std::vector<TauValue> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(parse_tau(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (const auto& t : out) {
    if (t.per_observation != out.front().per_observation) {
      throw ConfigError("tau grid mixes per-observation (N) and absolute values");
    }
  }
  return out;
}

std::string format_tau(const TauValue& t) {
  std::ostringstream os;
  os.precision(17);
  os << t.value;
  if (t.per_observation) os << 'N';
  return os.str();
}

namespace {

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> known) {
  if (!obj.is_object()) throw ConfigError("config '" + where + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (!known.count(k)) {
      throw ConfigError("unknown config key '" + (where.empty() ? k : where + "." + k) + "'");
    }
  }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

TauValue tau_from_json(const json& v, const std::string& where) {
  if (v.is_number()) {
    TauValue t{v.get<double>(), false};
    if (!(t.value > 0.0)) throw ConfigError("config key '" + where + "' must be > 0");
    return t;
  }
  if (v.is_string()) return parse_tau(v.get<std::string>());
  throw ConfigError("config key '" + where + "' must be a number or a string like \"0.025N\"");
}

json tau_to_json(const TauValue& t) {
  if (t.per_observation) return format_tau(t);
  return t.value;
}

}  // namespace

void apply_json(RunConfig& cfg, const json& j) {
  reject_unknown(j, "", {"data", "family", "prior", "penalty", "optimizer", "path"});
  if (j.contains("data")) {
    const json& d = j["data"];
    reject_unknown(d, "data", {"path", "response", "standardize", "intercept", "second_order"});
    if (d.contains("path")) cfg.design.source = get<std::string>(d, "path", "data");
    if (d.contains("response")) cfg.design.response_column = get<std::string>(d, "response", "data");
    if (d.contains("standardize")) cfg.design.standardize = get<bool>(d, "standardize", "data");
    if (d.contains("intercept")) cfg.design.intercept = get<bool>(d, "intercept", "data");
    if (d.contains("second_order")) cfg.design.second_order = get<bool>(d, "second_order", "data");
  }
  if (j.contains("family")) {
    const json& f = j["family"];
    reject_unknown(f, "family", {"name", "aux"});
    if (f.contains("name")) cfg.family = parse_family(get<std::string>(f, "name", "family"));
    if (f.contains("aux")) cfg.aux = get<double>(f, "aux", "family");
  }
  if (j.contains("prior")) {
    const json& p = j["prior"];
    reject_unknown(p, "prior", {"kind", "groups", "group_scale", "softmax_temp"});
    if (p.contains("kind")) cfg.prior = parse_prior(get<std::string>(p, "kind", "prior"));
    if (p.contains("groups")) cfg.groups_path = get<std::string>(p, "groups", "prior");
    if (p.contains("group_scale")) cfg.group_scale = get<double>(p, "group_scale", "prior");
    if (p.contains("softmax_temp")) cfg.softmax_temp = get<double>(p, "softmax_temp", "prior");
  }
  if (j.contains("penalty")) {
    const json& p = j["penalty"];
    reject_unknown(p, "penalty", {"tau", "barrier_a"});
    if (p.contains("tau")) cfg.tau = tau_from_json(p["tau"], "penalty.tau");
    if (p.contains("barrier_a")) cfg.barrier_a = get<double>(p, "barrier_a", "penalty");
  }
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    const std::string w = "optimizer";
    reject_unknown(o, w,
                   {"step", "minibatch", "patience", "holdout", "max_iters", "mode", "seed",
                    "adam_beta1", "adam_beta2", "adam_eps", "min_delta", "tol", "estimate_aux",
                    "svrg_epoch", "bcd_eps", "bcd_half_steps", "inner_tol", "inner_max_iters",
                    "log_every"});
    OptimizerConfig& oc = cfg.optimizer;
    if (o.contains("step")) oc.step = get<double>(o, "step", w);
    if (o.contains("minibatch")) oc.minibatch = get<Eigen::Index>(o, "minibatch", w);
    if (o.contains("patience")) oc.patience = get<int>(o, "patience", w);
    if (o.contains("holdout")) oc.holdout = get<Eigen::Index>(o, "holdout", w);
    if (o.contains("max_iters")) oc.max_iters = get<int>(o, "max_iters", w);
    if (o.contains("mode")) oc.mode = parse_mode(get<std::string>(o, "mode", w));
    if (o.contains("seed")) oc.seed = get<std::uint64_t>(o, "seed", w);
    if (o.contains("adam_beta1")) oc.adam_beta1 = get<double>(o, "adam_beta1", w);
    if (o.contains("adam_beta2")) oc.adam_beta2 = get<double>(o, "adam_beta2", w);
    if (o.contains("adam_eps")) oc.adam_eps = get<double>(o, "adam_eps", w);
    if (o.contains("min_delta")) oc.min_delta = get<double>(o, "min_delta", w);
    if (o.contains("tol")) oc.tol = get<double>(o, "tol", w);
    if (o.contains("estimate_aux")) oc.estimate_aux = get<bool>(o, "estimate_aux", w);
    if (o.contains("svrg_epoch")) oc.svrg_epoch = get<Eigen::Index>(o, "svrg_epoch", w);
    if (o.contains("bcd_eps")) oc.bcd_eps = get<double>(o, "bcd_eps", w);
    if (o.contains("bcd_half_steps")) oc.bcd_half_steps = get<int>(o, "bcd_half_steps", w);
    if (o.contains("inner_tol")) oc.inner_tol = get<double>(o, "inner_tol", w);
    if (o.contains("inner_max_iters")) oc.inner_max_iters = get<int>(o, "inner_max_iters", w);
    if (o.contains("log_every")) oc.log_every = get<int>(o, "log_every", w);
  }
  if (j.contains("path")) {
    const json& p = j["path"];
    reject_unknown(p, "path",
                   {"tau_grid", "warm_start", "reset_gamma", "median_window", "holdout_fraction",
                    "heldout_early_stop"});
    if (p.contains("tau_grid")) {
      const json& g = p["tau_grid"];
      if (g.is_string() && g.get<std::string>() == "default") {
        cfg.tau_grid.reset();
      } else if (g.is_string()) {
        cfg.tau_grid = parse_tau_grid(g.get<std::string>());
      } else if (g.is_array()) {
        std::vector<TauValue> grid;
        for (const auto& v : g) grid.push_back(tau_from_json(v, "path.tau_grid"));
        cfg.tau_grid = grid;
      } else {
        throw ConfigError("config key 'path.tau_grid' must be \"default\", a string or an array");
      }
    }
    if (p.contains("warm_start")) cfg.path.warm_start = get<bool>(p, "warm_start", "path");
    if (p.contains("reset_gamma")) cfg.path.reset_gamma = get<bool>(p, "reset_gamma", "path");
    if (p.contains("median_window")) cfg.path.median_window = get<int>(p, "median_window", "path");
    if (p.contains("heldout_early_stop")) {
      cfg.path.heldout_early_stop = get<bool>(p, "heldout_early_stop", "path");
    }
    if (p.contains("holdout_fraction")) {
      cfg.path.holdout_fraction = get<double>(p, "holdout_fraction", "path");
    }
  }
}

void apply_json_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  apply_json(cfg, j);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["data"] = {{"path", cfg.design.source},
               {"response", cfg.design.response_column},
               {"standardize", cfg.design.standardize},
               {"intercept", cfg.design.intercept},
               {"second_order", cfg.design.second_order}};
  j["family"] = {{"name", std::string(to_string(cfg.family))}, {"aux", cfg.aux}};
  j["prior"] = {{"kind", std::string(to_string(cfg.prior))}};
  if (!cfg.groups_path.empty()) j["prior"]["groups"] = cfg.groups_path;
  if (cfg.group_scale) j["prior"]["group_scale"] = *cfg.group_scale;
  if (cfg.softmax_temp) j["prior"]["softmax_temp"] = *cfg.softmax_temp;
  j["penalty"] = {{"tau", tau_to_json(cfg.tau)}};
  if (cfg.barrier_a) j["penalty"]["barrier_a"] = *cfg.barrier_a;
  const OptimizerConfig& o = cfg.optimizer;
  j["optimizer"] = {{"step", o.step},
                    {"minibatch", o.minibatch},
                    {"patience", o.patience},
                    {"max_iters", o.max_iters},
                    {"mode", std::string(to_string(o.mode))},
                    {"seed", o.seed},
                    {"adam_beta1", o.adam_beta1},
                    {"adam_beta2", o.adam_beta2},
                    {"adam_eps", o.adam_eps},
                    {"min_delta", o.min_delta},
                    {"tol", o.tol},
                    {"estimate_aux", o.estimate_aux},
                    {"svrg_epoch", o.svrg_epoch},
                    {"bcd_eps", o.bcd_eps},
                    {"bcd_half_steps", o.bcd_half_steps},
                    {"inner_tol", o.inner_tol},
                    {"inner_max_iters", o.inner_max_iters},
                    {"log_every", o.log_every}};
  if (o.holdout) j["optimizer"]["holdout"] = *o.holdout;
  json grid = "default";
  if (cfg.tau_grid) {
    grid = json::array();
    for (const auto& t : *cfg.tau_grid) grid.push_back(tau_to_json(t));
  }
  j["path"] = {{"tau_grid", grid},
               {"warm_start", cfg.path.warm_start},
               {"reset_gamma", cfg.path.reset_gamma},
               {"median_window", cfg.path.median_window},
               {"holdout_fraction", cfg.path.holdout_fraction},
               {"heldout_early_stop", cfg.path.heldout_early_stop}};
  return j;
}

}  // namespace palasso::cli
