#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bass/corpus.hpp"
#include "bass/suggest.hpp"

namespace bass {

inline constexpr std::size_t kAvoidWordCap = 250;

struct QaPair {
  std::string question;
  std::string answer;
};

enum class LabelRule { theme1, pair };

LabelRule parse_label_rule(std::string_view s);

struct GenSpec {
  std::vector<std::string> styles;
  std::vector<std::string> themes;
  std::vector<std::string> settings;
  std::vector<std::string> moods;
  std::vector<QaPair> qa_pairs;
  std::uint64_t seed = 0;
  std::string sample_text;  // contents, not a path
  std::optional<std::size_t> max_docs;
  LabelRule label_rule = LabelRule::theme1;

  // Throws ValidationError for empty sets or fewer than two themes.
  void validate() const;
};

// JSON config: styles, themes, settings, moods (string arrays), qa_pairs
// ([{question, answer}]), optional seed, max_docs, label_rule, and
// sample_text_path (relative to the config file) or sample_text.
GenSpec load_gen_spec(const std::filesystem::path& path);
GenSpec gen_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct Combo {
  std::string style;
  std::string theme1;
  std::string theme2;
  std::string setting;
  std::string mood;
  QaPair qa;
};

// S x {(t1, t2) : t1 != t2} x G with a seeded mood and QA pair each, then a
// seeded shuffle.
std::vector<Combo> build_combos(const GenSpec& spec);

// Word frequencies that become the "words to avoid" list.
class AvoidDict {
 public:
  void add(const std::string& word, int times = 1) { counts_[word] += times; }
  int count(const std::string& word) const;
  std::size_t size() const { return counts_.size(); }
  const std::map<std::string, int>& counts() const { return counts_; }
  // Highest counts first, ties in lexicographic order.
  std::vector<std::string> most_common(std::size_t n = kAvoidWordCap) const;

  bool operator==(const AvoidDict&) const = default;

 private:
  std::map<std::string, int> counts_;
};

// Strips surrounding punctuation and a trailing possessive.
std::string strip_word(std::string_view raw);

// Words a text contributes: each stripped word longer than four characters
// that starts with a capital and is not a stopword, and each containing four
// consecutive digits (a word meeting both rules counts twice).
std::vector<std::string> harvest_words(std::string_view text);

AvoidDict update_avoid(AvoidDict dict, std::string_view text);

// Harvest of the sample text plus the fixed openings "In the" and "On the".
AvoidDict seed_avoid_dict(std::string_view sample_text);

std::string_view scifi_system_prompt();
std::string render_scifi_user_prompt(const Combo& combo, const std::vector<std::string>& avoid_words);

// Part of a theme/style string before the first ':'.
std::string short_name(std::string_view entry);

struct GeneratedRecord {
  std::string id;
  std::string text;
  std::string label;
  Combo combo;

  nlohmann::json to_json() const;
};

struct GenerationFailure {
  std::size_t combo_index = 0;
  std::string error;
};

struct GenerationResult {
  std::vector<GeneratedRecord> records;
  std::vector<GenerationFailure> failures;
  AvoidDict avoid;
  std::size_t attempted = 0;

  std::string to_jsonl() const;
  nlohmann::json metadata() const;
};

// Sequential: the avoid list for each call reflects every earlier response.
// Backend failures skip the combo and are recorded.
GenerationResult generate(const GenSpec& spec, LlmBackend& backend);

// Deterministic stand-in generator: builds a short plot summary from a hash of
// the user prompt, with invented names and a year, steering clear of the
// prompt's avoid list.
class MockSciFiBackend final : public LlmBackend {
 public:
  std::string complete(const LlmRequest& request) override;
  std::string identifier() const override { return "mock-scifi"; }
};

// Planted-topic corpus: each topic owns a disjoint vocabulary of invented
// words; a document draws from its own topic with probability 1 - mix and
// from the pooled vocabulary otherwise.
struct PlantedSpec {
  int topics = 3;
  int docs = 300;
  int doc_length = 40;
  int words_per_topic = 30;
  double mix = 0.2;
  std::uint64_t seed = 0;
};

std::vector<Document> planted_documents(const PlantedSpec& spec);
// Vocabulary owned by one planted topic.
std::vector<std::string> planted_vocabulary(int topic, int words_per_topic);

}  // namespace bass
