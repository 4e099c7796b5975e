#include "palasso/design.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

#include "palasso/error.hpp"

namespace palasso {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::vector<std::string> Dataset::coefficient_names() const {
  if (!data.expansion) return base_names;
  const ExpansionMap& map = *data.expansion;
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(map.expanded_size()));
  for (Eigen::Index k = 0; k < map.expanded_size(); ++k) {
    const auto& t = map.term(k);
    const auto& a = base_names[static_cast<std::size_t>(t.first)];
    switch (t.kind) {
      case TermKind::main: names.push_back(a); break;
      case TermKind::quadratic: names.push_back(a + "^2"); break;
      case TermKind::interaction:
        names.push_back(a + ":" + base_names[static_cast<std::size_t>(t.second)]);
        break;
    }
  }
  return names;
}

Dataset read_csv(std::istream& in, const DesignSpec& spec) {
  const std::string where = spec.source.empty() ? std::string("<stream>") : spec.source;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, header_line)) {
    ++line_no;
    if (!trim(header_line).empty()) break;
  }
  if (trim(header_line).empty()) throw DataError(where + ": empty file");
  header = split(header_line);

  Dataset ds;
  ds.intercept = spec.intercept;
  std::ptrdiff_t response = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == spec.response_column) {
      response = static_cast<std::ptrdiff_t>(c);
    } else {
      ds.base_names.emplace_back(header[c]);
    }
  }
  if (response < 0) {
    throw DataError(where + ": response column '" + spec.response_column + "' not found");
  }
  ds.response_name = spec.response_column;

  const std::size_t n_cols = header.size();
  const Eigen::Index p = static_cast<Eigen::Index>(n_cols - 1);
  std::vector<double> xs;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != n_cols) {
      throw DataError(where + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(n_cols) + " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v)) {
        throw DataError(where + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                        std::string(cells[c]) + "' in column '" + std::string(header[c]) + "'");
      }
      (static_cast<std::ptrdiff_t>(c) == response ? ys : xs).push_back(v);
    }
  }
  if (ys.empty()) throw DataError(where + ": no data rows");

  const Eigen::Index n = static_cast<Eigen::Index>(ys.size());
  ds.data.X = Eigen::Map<const RowMatrix>(xs.data(), n, p);
  ds.data.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  if (spec.standardize) {
    ds.scaling = standardize_columns(ds.data.X);
  } else {
    ds.scaling.mean = Eigen::VectorXd::Zero(p);
    ds.scaling.sd = Eigen::VectorXd::Ones(p);
    ds.scaling.constant.assign(static_cast<std::size_t>(p), false);
  }
  if (spec.second_order) {
    if (p < 2) throw DataError(where + ": second-order expansion needs at least 2 predictors");
    ds.data.expansion = ExpansionMap(p);
  }
  return ds;
}

Dataset load_csv(const DesignSpec& spec) {
  std::ifstream in(spec.source);
  if (!in) throw DataError("cannot open '" + spec.source + "'");
  return read_csv(in, spec);
}

Standardization standardize_columns(RowMatrix& X) {
  Standardization s;
  const Eigen::Index p = X.cols();
  const double n = static_cast<double>(X.rows());
  s.mean = X.colwise().mean().transpose();
  s.sd.resize(p);
  s.constant.assign(static_cast<std::size_t>(p), false);
  s.applied = true;
  for (Eigen::Index j = 0; j < p; ++j) {
    X.col(j).array() -= s.mean[j];
    const double sd = std::sqrt(X.col(j).squaredNorm() / n);
    const double mag = std::max(1.0, std::abs(s.mean[j]));
    if (!(sd > 1e-12 * mag)) {
      s.constant[static_cast<std::size_t>(j)] = true;
      s.sd[j] = 1.0;
      X.col(j).setZero();
    } else {
      s.sd[j] = sd;
      X.col(j) /= sd;
    }
  }
  return s;
}

Eigen::VectorXd to_original_scale(const Eigen::Ref<const Eigen::VectorXd>& beta,
                                  const Standardization& scaling, double& intercept) {
  if (beta.size() != scaling.sd.size()) {
    throw DimensionError("coefficient count does not match the base columns");
  }
  Eigen::VectorXd out = beta.array() / scaling.sd.array();
  intercept -= out.dot(scaling.mean);
  return out;
}

GroupStructure hierarchical_groups(Eigen::Index base_size) {
  if (base_size < 2) throw DomainError("hierarchical groups need at least 2 base columns");
  const ExpansionMap map(base_size);
  std::vector<std::vector<Eigen::Index>> mem(static_cast<std::size_t>(map.expanded_size()));
  Eigen::Index g = 0;
  for (Eigen::Index i = 0; i < base_size; ++i) {
    for (Eigen::Index j = i + 1; j < base_size; ++j, ++g) {
      for (const Eigen::Index c : {i, j, base_size + i, base_size + j, map.interaction_index(i, j)}) {
        mem[static_cast<std::size_t>(c)].push_back(g);
      }
    }
  }
  return GroupStructure(std::move(mem), g);
}

}  // namespace palasso
