#include "metacausal/mcm_core.hpp"

#include <json.hpp>

namespace metacausal {

TypeDomain::TypeDomain(std::vector<TypeLabel> labels) : labels_(std::move(labels)) {
  std::set<TypeLabel> unique(labels_.begin(), labels_.end());
  if (unique.size() != labels_.size())
    throw ArgumentError("type domain contains duplicate labels");
  if (!contains(TypeLabel::no_edge())) labels_.insert(labels_.begin(), TypeLabel::no_edge());
}

MetaCausalState::MetaCausalState(std::size_t n) : n_(n), entries_(n * n) {
  if (n == 0) throw ArgumentError("meta-causal state needs n >= 1");
}

MetaCausalState::MetaCausalState(std::size_t n, std::vector<TypeLabel> row_major)
    : n_(n), entries_(std::move(row_major)) {
  if (n == 0) throw ArgumentError("meta-causal state needs n >= 1");
  if (entries_.size() != n * n)
    throw ArgumentError("meta-causal state needs n*n entries");
}

MetaCausalState MetaCausalState::from_rows(
    const std::vector<std::vector<std::string>>& rows) {
  const std::size_t n = rows.size();
  std::vector<TypeLabel> entries;
  entries.reserve(n * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw ArgumentError("meta-causal state must be square");
    for (const auto& name : row) entries.emplace_back(name);
  }
  return MetaCausalState(n, std::move(entries));
}

const TypeLabel& MetaCausalState::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw ArgumentError("edge index out of range");
  return entries_[i * n_ + j];
}

void MetaCausalState::set(std::size_t i, std::size_t j, TypeLabel t) {
  if (i >= n_ || j >= n_) throw ArgumentError("edge index out of range");
  entries_[i * n_ + j] = std::move(t);
}

std::string MetaCausalState::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < n_; ++i) {
    if (i) out += ';';
    for (std::size_t j = 0; j < n_; ++j) {
      if (j) out += ',';
      out += entries_[i * n_ + j].name();
    }
  }
  return out;
}

bool edge_present(const MetaCausalState& t, std::size_t i, std::size_t j) {
  return !t.at(i, j).is_no_edge();
}

std::string to_json(const MetaCausalState& t) {
  nlohmann::json types = nlohmann::json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < t.size(); ++j) row.push_back(t.at(i, j).name());
    types.push_back(std::move(row));
  }
  return nlohmann::json{{"n", t.size()}, {"types", std::move(types)}}.dump();
}

MetaCausalState state_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("invalid meta-causal state JSON: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("types"))
    throw ArgumentError("meta-causal state JSON needs 'n' and 'types'");
  const auto n = j.at("n").get<std::size_t>();
  auto rows = j.at("types").get<std::vector<std::vector<std::string>>>();
  if (rows.size() != n) throw ArgumentError("'types' row count differs from 'n'");
  return MetaCausalState::from_rows(rows);
}

}  // namespace metacausal
