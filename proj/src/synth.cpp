#include "palasso/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "palasso/error.hpp"

namespace palasso {

std::string_view to_string(Structure s) {
  switch (s) {
    case Structure::independent: return "independent";
    case Structure::group: return "group";
    case Structure::hierarchical: return "hierarchical";
  }
  return "unknown";
}

Structure parse_structure(std::string_view name) {
  if (name == "independent") return Structure::independent;
  if (name == "group") return Structure::group;
  if (name == "hierarchical") return Structure::hierarchical;
  throw ConfigError("unknown structure '" + std::string(name) +
                    "' (expected independent, group or hierarchical)");
}

namespace {

std::vector<Eigen::Index> choose(Eigen::Index n, Eigen::Index k, std::mt19937_64& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

double draw_response(FamilyKind kind, double eta, double aux, std::mt19937_64& rng) {
  switch (kind) {
    case FamilyKind::gaussian: return eta + aux * std::normal_distribution<double>()(rng);
    case FamilyKind::bernoulli_logit: {
      const double pr = 1.0 / (1.0 + std::exp(-eta));
      return std::bernoulli_distribution(pr)(rng) ? 1.0 : 0.0;
    }
    case FamilyKind::poisson_log:
      return static_cast<double>(std::poisson_distribution<long long>(std::exp(eta))(rng));
    case FamilyKind::negbin_log: {
      const double rate = std::gamma_distribution<double>(aux, std::exp(eta) / aux)(rng);
      if (!(rate > 0.0)) return 0.0;
      return static_cast<double>(std::poisson_distribution<long long>(rate)(rng));
    }
    case FamilyKind::cauchy: return eta + std::cauchy_distribution<double>(0.0, aux)(rng);
  }
  return 0.0;
}

}  // namespace

SynthResult generate(const SynthSpec& spec) {
  if (spec.n < 1 || spec.p < 1) throw ConfigError("synthetic N and P must be >= 1");
  if (spec.n_active < 0) throw ConfigError("n_active must be >= 0");
  if (!(spec.aux > 0.0)) throw ConfigError("aux must be > 0");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;

  SynthResult out;
  Dataset& ds = out.dataset;
  ds.data.X.resize(spec.n, spec.p);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    for (Eigen::Index j = 0; j < spec.p; ++j) ds.data.X(i, j) = normal(rng);
  }

  switch (spec.structure) {
    case Structure::independent: {
      if (spec.n_active > spec.p) throw ConfigError("n_active exceeds P");
      out.true_beta = Eigen::VectorXd::Zero(spec.p);
      for (const Eigen::Index j : choose(spec.p, spec.n_active, rng)) {
        out.true_beta[j] = spec.coef_scale * normal(rng);
      }
      break;
    }
    case Structure::group: {
      if (spec.group_size < 1 || spec.p % spec.group_size != 0) {
        throw ConfigError("group_size must divide P");
      }
      if (spec.n_active * spec.group_size > spec.p) {
        throw ConfigError("n_active * group_size exceeds P");
      }
      out.groups = GroupStructure::contiguous(spec.p, spec.group_size);
      out.true_beta = Eigen::VectorXd::Zero(spec.p);
      for (const Eigen::Index g : choose(spec.p / spec.group_size, spec.n_active, rng)) {
        for (Eigen::Index k = 0; k < spec.group_size; ++k) {
          out.true_beta[g * spec.group_size + k] = spec.coef_scale * normal(rng);
        }
      }
      break;
    }
    case Structure::hierarchical: {
      if (spec.p < 2) throw ConfigError("hierarchical structure needs base P >= 2");
      out.groups = hierarchical_groups(spec.p);
      const GroupStructure& gs = *out.groups;
      if (spec.n_active > gs.n_groups()) throw ConfigError("n_active exceeds the pair count");
      ds.data.expansion = ExpansionMap(spec.p);
      out.true_beta = Eigen::VectorXd::Zero(ds.data.expansion->expanded_size());
      for (const Eigen::Index g : choose(gs.n_groups(), spec.n_active, rng)) {
        for (const Eigen::Index c : gs.members(g)) {
          if (out.true_beta[c] == 0.0) out.true_beta[c] = spec.coef_scale * normal(rng);
        }
      }
      break;
    }
  }

  ds.data.y.resize(spec.n);
  Eigen::VectorXd row(ds.data.n_features());
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    if (ds.data.expansion) {
      ds.data.expansion->expand_row(ds.data.X.row(i).data(), row.data());
    } else {
      row = ds.data.X.row(i).transpose();
    }
    const double eta = spec.intercept + row.dot(out.true_beta);
    ds.data.y[i] = draw_response(spec.family, eta, spec.aux, rng);
  }

  ds.intercept = true;
  ds.response_name = "y";
  for (Eigen::Index j = 0; j < spec.p; ++j) ds.base_names.push_back("x" + std::to_string(j));
  ds.scaling.mean = Eigen::VectorXd::Zero(spec.p);
  ds.scaling.sd = Eigen::VectorXd::Ones(spec.p);
  ds.scaling.constant.assign(static_cast<std::size_t>(spec.p), false);
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  for (const auto& n : ds.base_names) out << n << ',';
  out << ds.response_name << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < ds.data.n_obs(); ++i) {
    for (Eigen::Index j = 0; j < ds.data.X.cols(); ++j) out << ds.data.X(i, j) << ',';
    out << ds.data.y[i] << '\n';
  }
}

void write_truth_csv(std::ostream& out, const SynthResult& sr) {
  const auto names = sr.dataset.coefficient_names();
  out << "index,name,true_beta\n";
  out.precision(17);
  for (Eigen::Index j = 0; j < sr.true_beta.size(); ++j) {
    out << j << ',' << names[static_cast<std::size_t>(j)] << ',' << sr.true_beta[j] << '\n';
  }
}

}  // namespace palasso
