#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bass {

enum class Winner { a, b };

struct Duel {
  std::string question;
  std::string item_a;
  std::string item_b;
  Winner winner = Winner::a;

  const std::string& winning_item() const { return winner == Winner::a ? item_a : item_b; }
  const std::string& losing_item() const { return winner == Winner::a ? item_b : item_a; }
};

// Pairwise preference records. Constructing validates a != b.
class JudgmentSet {
 public:
  JudgmentSet() = default;
  explicit JudgmentSet(std::vector<Duel> duels);

  void add(Duel duel);
  const std::vector<Duel>& duels() const { return duels_; }
  // Sorted universe of compared items.
  std::vector<std::string> items() const;
  // Every duel with winner and loser swapped.
  JudgmentSet reversed() const;

 private:
  std::vector<Duel> duels_;
};

struct BtOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  // Added to each direction of every compared pair; 0 disables.
  double pseudocount = 0.5;
};

struct BtResult {
  std::map<std::string, double> strengths;  // sum to 1
  int iterations = 0;
  bool converged = false;
};

// Minorize-maximize fit of Bradley-Terry strengths. Throws ConnectivityError
// when the comparison graph is disconnected, ValidationError when some item
// has no wins or no losses.
BtResult fit_bt(const JudgmentSet& judgments, BtOptions options = {});

// Descending strength, ties by ascending id.
std::vector<std::string> rank(const BtResult& result);

// One annotator's vote on a (question, item_a, item_b) comparison.
struct AnnotatedDuel {
  Duel duel;
  std::string annotator;
};

// Collapses annotator votes into one duel per (question, unordered pair) by
// majority. Throws ValidationError for an even vote count on any comparison.
JudgmentSet majority_vote(const std::vector<AnnotatedDuel>& votes);

// CSV with header question,group_a,group_b,winner; winner is "a", "b", or
// the winning group's id.
std::vector<Duel> parse_duels_csv(std::string_view content);
// Same columns plus annotator.
std::vector<AnnotatedDuel> parse_annotated_duels_csv(std::string_view content);

nlohmann::json strengths_json(const BtResult& result);

}  // namespace bass
