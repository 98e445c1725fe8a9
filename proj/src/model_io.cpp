#include "cstm/model_io.hpp"

#include "cstm/error.hpp"

#include <fmt/format.h>

#include <map>

namespace cstm {

using json = nlohmann::ordered_json;

namespace {

std::vector<std::string> infer_absorbing(const std::vector<std::string>& names,
                                         const std::vector<Matrix>& blocks) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    bool absorbing = true;
    for (const auto& b : blocks) {
      if (b(ii, ii) != 1.0) {
        absorbing = false;
        break;
      }
    }
    if (absorbing) out.push_back(names[i]);
  }
  return out;
}

LabeledModel assemble(std::vector<std::string> names, std::vector<std::string> absorbing,
                      std::vector<Matrix> blocks, bool constant, int horizon) {
  StateSpace space(std::move(names), std::move(absorbing));
  auto tm = constant ? TransitionModel::constant(std::move(blocks.front()), horizon)
                     : TransitionModel::time_varying(std::move(blocks));
  return {std::move(space), std::move(tm)};
}

}  // namespace

Table transition_model_table(const StateSpace& space, const TransitionModel& tm) {
  Table t;
  t.header = {"cycle", "from"};
  for (const auto& s : space.names()) t.header.push_back(s);
  const bool constant = tm.kind() == ModelKind::constant;
  const int blocks = constant ? 1 : tm.horizon();
  for (int c = 0; c < blocks; ++c) {
    const auto& p = tm.at(c);
    for (std::size_t i = 0; i < space.size(); ++i) {
      std::vector<std::string> row{constant ? std::string("all") : std::to_string(c), space.names()[i]};
      for (std::size_t j = 0; j < space.size(); ++j) {
        row.push_back(format_exact(p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

LabeledModel read_transition_model_table(const Table& table, std::optional<int> horizon) {
  if (table.header.size() < 4 || table.header[0] != "cycle" || table.header[1] != "from") {
    throw ConfigError("transition table needs columns cycle, from and at least two states");
  }
  std::vector<std::string> names(table.header.begin() + 2, table.header.end());
  const std::size_t n = names.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[names[i]] = i;

  std::vector<Matrix> blocks;
  std::vector<std::vector<bool>> seen;
  bool constant = false;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = r + 2;
    std::size_t cycle = 0;
    if (row[0] == "all") {
      constant = true;
    } else {
      const double c = parse_number(row[0], "transition table", line);
      if (c < 0 || c != static_cast<double>(static_cast<std::size_t>(c))) {
        throw ConfigError(fmt::format("transition table line {}: bad cycle '{}'", line, row[0]));
      }
      cycle = static_cast<std::size_t>(c);
    }
    auto it = index.find(row[1]);
    if (it == index.end()) {
      throw ConfigError(fmt::format("transition table line {}: unknown state '{}'", line, row[1]));
    }
    while (blocks.size() <= cycle) {
      blocks.push_back(Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
      seen.emplace_back(n, false);
    }
    if (seen[cycle][it->second]) {
      throw ConfigError(fmt::format("transition table line {}: repeated row for cycle {}, state '{}'",
                                    line, row[0], row[1]));
    }
    seen[cycle][it->second] = true;
    for (std::size_t j = 0; j < n; ++j) {
      blocks[cycle](static_cast<Eigen::Index>(it->second), static_cast<Eigen::Index>(j)) =
          parse_number(row[j + 2], "transition table", line);
    }
  }
  if (blocks.empty()) throw ConfigError("transition table has no rows");
  if (constant && blocks.size() != 1) throw ConfigError("transition table mixes 'all' with cycle blocks");
  for (std::size_t c = 0; c < seen.size(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[c][i]) {
        throw ConfigError(fmt::format("transition table: cycle {} lacks a row for '{}'", c, names[i]));
      }
    }
  }
  if (constant && !horizon) throw ConfigError("a constant transition table needs a horizon");
  auto absorbing = infer_absorbing(names, blocks);
  const int h = constant ? *horizon : static_cast<int>(blocks.size());
  return assemble(std::move(names), std::move(absorbing), std::move(blocks), constant, h);
}

json transition_model_json(const StateSpace& space, const TransitionModel& tm) {
  json doc;
  doc["states"] = space.names();
  doc["absorbing"] = space.absorbing();
  const bool constant = tm.kind() == ModelKind::constant;
  doc["kind"] = constant ? "constant" : "time_varying";
  doc["horizon"] = tm.horizon();
  json mats = json::array();
  const int blocks = constant ? 1 : tm.horizon();
  for (int c = 0; c < blocks; ++c) {
    const auto& p = tm.at(c);
    json rows = json::array();
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      json r = json::array();
      for (Eigen::Index j = 0; j < p.cols(); ++j) r.push_back(p(i, j));
      rows.push_back(std::move(r));
    }
    mats.push_back({{"cycle", c}, {"rows", std::move(rows)}});
  }
  doc["matrices"] = std::move(mats);
  return doc;
}

LabeledModel read_transition_model_json(const json& doc) {
  try {
    auto names = doc.at("states").get<std::vector<std::string>>();
    auto absorbing = doc.value("absorbing", std::vector<std::string>{});
    const auto kind = doc.at("kind").get<std::string>();
    if (kind != "constant" && kind != "time_varying") {
      throw ConfigError(fmt::format("unknown model kind '{}'", kind));
    }
    const bool constant = kind == "constant";
    const int horizon = doc.at("horizon").get<int>();
    const auto n = static_cast<Eigen::Index>(names.size());
    const auto& mats = doc.at("matrices");
    std::vector<Matrix> blocks(mats.size());
    std::vector<bool> seen(mats.size(), false);
    for (const auto& m : mats) {
      const auto c = m.at("cycle").get<std::size_t>();
      if (c >= mats.size() || seen[c]) {
        throw ConfigError(fmt::format("matrix cycle {} is out of range or repeated", c));
      }
      seen[c] = true;
      const auto& rows = m.at("rows");
      if (static_cast<Eigen::Index>(rows.size()) != n) {
        throw ConfigError(fmt::format("matrix for cycle {} has {} rows, expected {}", c, rows.size(), n));
      }
      Matrix p(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(r.size()) != n) {
          throw ConfigError(fmt::format("matrix for cycle {}, row {} has {} entries", c, i, r.size()));
        }
        for (Eigen::Index j = 0; j < n; ++j) p(i, j) = r[static_cast<std::size_t>(j)].get<double>();
      }
      blocks[c] = std::move(p);
    }
    if (blocks.empty()) throw ConfigError("model has no matrices");
    if (constant && blocks.size() != 1) throw ConfigError("a constant model carries exactly one matrix");
    if (!constant && static_cast<int>(blocks.size()) != horizon) {
      throw ConfigError(fmt::format("{} matrices for horizon {}", blocks.size(), horizon));
    }
    return assemble(std::move(names), std::move(absorbing), std::move(blocks), constant, horizon);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("transition model JSON: {}", e.what()));
  }
}

}  // namespace cstm
