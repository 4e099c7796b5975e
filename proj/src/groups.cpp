#include "palasso/groups.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "palasso/error.hpp"

namespace palasso {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_index(std::string_view s, Eigen::Index& out) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return false;
  out = static_cast<Eigen::Index>(v);
  return true;
}

}  // namespace

GroupStructure::GroupStructure(std::vector<std::vector<Eigen::Index>> memberships,
                               Eigen::Index n_groups)
    : memberships_(std::move(memberships)), members_(static_cast<std::size_t>(n_groups)) {
  if (n_groups < 0) throw DomainError("negative group count");
  for (std::size_t p = 0; p < memberships_.size(); ++p) {
    auto& gs = memberships_[p];
    std::sort(gs.begin(), gs.end());
    gs.erase(std::unique(gs.begin(), gs.end()), gs.end());
    for (const Eigen::Index g : gs) {
      if (g < 0 || g >= n_groups) {
        throw DomainError("group index " + std::to_string(g) + " out of range [0, " +
                          std::to_string(n_groups) + ")");
      }
      members_[static_cast<std::size_t>(g)].push_back(static_cast<Eigen::Index>(p));
    }
  }
  for (std::size_t g = 0; g < members_.size(); ++g) {
    if (members_[g].empty()) throw DomainError("group " + std::to_string(g) + " is empty");
  }
}

GroupStructure GroupStructure::from_pairs(
    Eigen::Index n_predictors, const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs) {
  std::vector<std::vector<Eigen::Index>> mem(static_cast<std::size_t>(n_predictors));
  Eigen::Index n_groups = 0;
  for (const auto& [p, g] : pairs) {
    if (p < 0 || p >= n_predictors) {
      throw DomainError("predictor index " + std::to_string(p) + " out of range [0, " +
                        std::to_string(n_predictors) + ")");
    }
    if (g < 0) throw DomainError("negative group index");
    mem[static_cast<std::size_t>(p)].push_back(g);
    n_groups = std::max(n_groups, g + 1);
  }
  return GroupStructure(std::move(mem), n_groups);
}

GroupStructure GroupStructure::contiguous(Eigen::Index n_predictors, Eigen::Index size) {
  if (size < 1 || n_predictors % size != 0) {
    throw DomainError("contiguous groups need a size dividing the predictor count");
  }
  std::vector<std::vector<Eigen::Index>> mem(static_cast<std::size_t>(n_predictors));
  for (Eigen::Index p = 0; p < n_predictors; ++p) mem[static_cast<std::size_t>(p)] = {p / size};
  return GroupStructure(std::move(mem), n_predictors / size);
}

GroupStructure GroupStructure::read(std::istream& in, Eigen::Index n_predictors) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto comma = s.find(',');
    Eigen::Index p = 0;
    Eigen::Index g = 0;
    const bool ok = comma != std::string_view::npos && parse_index(s.substr(0, comma), p) &&
                    parse_index(s.substr(comma + 1), g);
    if (!ok) {
      if (!seen_data && pairs.empty() && line_no == 1) continue;  // header
      throw DataError("group file line " + std::to_string(line_no) +
                      ": expected 'predictor_index,group_index'");
    }
    seen_data = true;
    pairs.emplace_back(p, g);
  }
  if (pairs.empty()) throw DataError("group file has no entries");
  try {
    return from_pairs(n_predictors, pairs);
  } catch (const DomainError& e) {
    throw DataError(std::string("group file: ") + e.what());
  }
}

GroupStructure GroupStructure::load(const std::string& path, Eigen::Index n_predictors) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open group file '" + path + "'");
  return read(in, n_predictors);
}

void GroupStructure::write(std::ostream& out) const {
  out << "predictor_index,group_index\n";
  for (std::size_t p = 0; p < memberships_.size(); ++p) {
    for (const Eigen::Index g : memberships_[p]) out << p << ',' << g << '\n';
  }
}

bool GroupStructure::is_partition() const {
  return std::all_of(memberships_.begin(), memberships_.end(),
                     [](const auto& gs) { return gs.size() == 1; });
}

}  // namespace palasso
