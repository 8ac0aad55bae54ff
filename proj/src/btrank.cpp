#include "bass/btrank.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "bass/common.hpp"
#include "bass/error.hpp"
#include "bass/io.hpp"
#include "bass/text.hpp"

namespace bass {

JudgmentSet::JudgmentSet(std::vector<Duel> duels) {
  for (auto& d : duels) add(std::move(d));
}

void JudgmentSet::add(Duel duel) {
  if (duel.item_a.empty() || duel.item_b.empty()) throw ValidationError("duel with an empty group id");
  if (duel.item_a == duel.item_b) throw ValidationError("duel compares \"" + duel.item_a + "\" with itself");
  duels_.push_back(std::move(duel));
}

std::vector<std::string> JudgmentSet::items() const {
  std::set<std::string> s;
  for (const auto& d : duels_) {
    s.insert(d.item_a);
    s.insert(d.item_b);
  }
  return {s.begin(), s.end()};
}

JudgmentSet JudgmentSet::reversed() const {
  JudgmentSet out;
  for (auto d : duels_) {
    d.winner = d.winner == Winner::a ? Winner::b : Winner::a;
    out.add(std::move(d));
  }
  return out;
}

BtResult fit_bt(const JudgmentSet& judgments, BtOptions options) {
  const auto items = judgments.items();
  const auto n = static_cast<Eigen::Index>(items.size());
  if (n < 2) throw ValidationError("Bradley-Terry needs at least two groups");
  if (options.pseudocount < 0) throw ValidationError("pseudocount must be non-negative");
  std::map<std::string, Eigen::Index> index;
  for (Eigen::Index i = 0; i < n; ++i) index.emplace(items[static_cast<std::size_t>(i)], i);

  // wins(i, j): times i beat j.
  MatrixXd wins = MatrixXd::Zero(n, n);
  for (const auto& d : judgments.duels()) wins(index[d.winning_item()], index[d.losing_item()]) += 1.0;
  const MatrixXd compared = wins + wins.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && compared(i, j) > 0) wins(i, j) += options.pseudocount;
    }
  }

  // Connected components of the comparison graph.
  std::vector<int> component(static_cast<std::size_t>(n), -1);
  int n_components = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (component[static_cast<std::size_t>(s)] >= 0) continue;
    std::vector<Eigen::Index> stack{s};
    component[static_cast<std::size_t>(s)] = n_components;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (Eigen::Index v = 0; v < n; ++v) {
        if (compared(u, v) > 0 && component[static_cast<std::size_t>(v)] < 0) {
          component[static_cast<std::size_t>(v)] = n_components;
          stack.push_back(v);
        }
      }
    }
    ++n_components;
  }
  if (n_components > 1) {
    std::vector<std::vector<std::string>> groups(static_cast<std::size_t>(n_components));
    for (Eigen::Index i = 0; i < n; ++i) groups[static_cast<std::size_t>(component[static_cast<std::size_t>(i)])].push_back(items[static_cast<std::size_t>(i)]);
    std::string msg = "comparison graph is disconnected:";
    for (const auto& g : groups) msg += " {" + text::join(g, ", ") + "}";
    throw ConnectivityError(msg, std::move(groups));
  }

  const MatrixXd games = wins + wins.transpose();
  const VectorXd total_wins = wins.rowwise().sum();
  const VectorXd total_losses = wins.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (total_wins[i] <= 0) throw ValidationError("group \"" + items[static_cast<std::size_t>(i)] + "\" never wins");
    if (total_losses[i] <= 0) throw ValidationError("group \"" + items[static_cast<std::size_t>(i)] + "\" never loses");
  }

  VectorXd p = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  BtResult result;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    VectorXd next(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double denom = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i && games(i, j) > 0) denom += games(i, j) / (p[i] + p[j]);
      }
      next[i] = total_wins[i] / denom;
    }
    next /= next.sum();
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = next;
    result.iterations = iter;
    if (change < options.tol) {
      result.converged = true;
      break;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) result.strengths.emplace(items[static_cast<std::size_t>(i)], p[i]);
  return result;
}

std::vector<std::string> rank(const BtResult& result) {
  std::vector<std::pair<std::string, double>> v(result.strengths.begin(), result.strengths.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (auto& [id, s] : v) out.push_back(id);
  return out;
}

JudgmentSet majority_vote(const std::vector<AnnotatedDuel>& votes) {
  // key: (question, lower id, higher id) -> wins for lower, wins for higher
  std::map<std::tuple<std::string, std::string, std::string>, std::pair<int, int>> tally;
  for (const auto& v : votes) {
    const auto& d = v.duel;
    if (d.item_a == d.item_b) throw ValidationError("duel compares \"" + d.item_a + "\" with itself");
    const bool a_low = d.item_a < d.item_b;
    auto& t = tally[{d.question, a_low ? d.item_a : d.item_b, a_low ? d.item_b : d.item_a}];
    const bool low_won = (d.winner == Winner::a) == a_low;
    (low_won ? t.first : t.second) += 1;
  }
  JudgmentSet out;
  for (const auto& [key, t] : tally) {
    const auto& [question, low, high] = key;
    if ((t.first + t.second) % 2 == 0) {
      throw ValidationError("even number of votes (" + std::to_string(t.first + t.second) + ") for question \"" +
                            question + "\" " + low + " vs " + high);
    }
    out.add({question, low, high, t.first > t.second ? Winner::a : Winner::b});
  }
  return out;
}

namespace {

Duel duel_from_row(const io::CsvRow& row, std::size_t row_no) {
  Duel d{text::trim(row[0]), text::trim(row[1]), text::trim(row[2]), Winner::a};
  const std::string w = text::trim(row[3]);
  if (w == "a" || w == "A" || w == d.item_a) {
    d.winner = Winner::a;
  } else if (w == "b" || w == "B" || w == d.item_b) {
    d.winner = Winner::b;
  } else {
    throw ParseError("winner \"" + w + "\" is neither a, b, nor one of the compared groups", row_no);
  }
  return d;
}

}  // namespace

std::vector<Duel> parse_duels_csv(std::string_view content) {
  std::vector<Duel> out;
  std::size_t row_no = 1;
  for (auto& row : io::parse_csv_columns(content, {"question", "group_a", "group_b", "winner"})) {
    out.push_back(duel_from_row(row, ++row_no));
  }
  return out;
}

std::vector<AnnotatedDuel> parse_annotated_duels_csv(std::string_view content) {
  std::vector<AnnotatedDuel> out;
  std::size_t row_no = 1;
  for (auto& row : io::parse_csv_columns(content, {"question", "group_a", "group_b", "winner", "annotator"})) {
    ++row_no;
    out.push_back({duel_from_row(row, row_no), text::trim(row[4])});
  }
  return out;
}

nlohmann::json strengths_json(const BtResult& result) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, s] : result.strengths) j[id] = s;
  return j;
}

}  // namespace bass
