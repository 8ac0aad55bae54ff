#include "bass/synthgen.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>

#include "bass/common.hpp"
#include "bass/embedded_data.hpp"
#include "bass/error.hpp"
#include "bass/io.hpp"
#include "bass/text.hpp"

namespace bass {

using nlohmann::json;

LabelRule parse_label_rule(std::string_view s) {
  if (s == "theme1") return LabelRule::theme1;
  if (s == "pair") return LabelRule::pair;
  throw ValidationError("unknown label rule \"" + std::string(s) + "\" (expected theme1 or pair)");
}

void GenSpec::validate() const {
  if (styles.empty() || themes.empty() || settings.empty() || moods.empty() || qa_pairs.empty()) {
    throw ValidationError("generation spec needs nonempty styles, themes, settings, moods and qa_pairs");
  }
  if (themes.size() < 2) throw ValidationError("generation spec needs at least two themes to form pairs");
}

GenSpec gen_spec_from_json(const json& j, const std::filesystem::path& base_dir) {
  GenSpec spec;
  try {
    spec.styles = j.at("styles").get<std::vector<std::string>>();
    spec.themes = j.at("themes").get<std::vector<std::string>>();
    spec.settings = j.at("settings").get<std::vector<std::string>>();
    spec.moods = j.at("moods").get<std::vector<std::string>>();
    for (const auto& qa : j.at("qa_pairs")) {
      spec.qa_pairs.push_back({qa.at("question").get<std::string>(), qa.at("answer").get<std::string>()});
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("max_docs") && !j["max_docs"].is_null()) spec.max_docs = j["max_docs"].get<std::size_t>();
    spec.label_rule = parse_label_rule(j.value("label_rule", "theme1"));
    if (j.contains("sample_text_path")) {
      spec.sample_text = io::read_file(base_dir / j["sample_text_path"].get<std::string>());
    } else {
      spec.sample_text = j.value("sample_text", "");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed generation spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

GenSpec load_gen_spec(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed generation spec ") + path.string() + ": " + e.what());
  }
  return gen_spec_from_json(j, path.parent_path());
}

std::vector<Combo> build_combos(const GenSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<Combo> combos;
  combos.reserve(spec.styles.size() * spec.themes.size() * (spec.themes.size() - 1) * spec.settings.size());
  for (const auto& style : spec.styles) {
    for (std::size_t t1 = 0; t1 < spec.themes.size(); ++t1) {
      for (std::size_t t2 = 0; t2 < spec.themes.size(); ++t2) {
        if (t1 == t2) continue;
        for (const auto& setting : spec.settings) {
          Combo c;
          c.style = style;
          c.theme1 = spec.themes[t1];
          c.theme2 = spec.themes[t2];
          c.setting = setting;
          c.mood = spec.moods[rng.index(spec.moods.size())];
          c.qa = spec.qa_pairs[rng.index(spec.qa_pairs.size())];
          combos.push_back(std::move(c));
        }
      }
    }
  }
  rng.shuffle(combos);
  return combos;
}

int AvoidDict::count(const std::string& word) const {
  auto it = counts_.find(word);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<std::string> AvoidDict::most_common(std::size_t n) const {
  std::vector<std::pair<std::string, int>> v(counts_.begin(), counts_.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (v.size() > n) v.resize(n);
  std::vector<std::string> out;
  for (auto& [w, c] : v) out.push_back(w);
  return out;
}

namespace {

bool is_punct(char32_t c) {
  if (c < 0x80) return std::ispunct(static_cast<int>(c)) != 0;
  // General punctuation block: quotes, dashes, ellipsis.
  return (c >= 0x2010 && c <= 0x2027) || c == 0x00AB || c == 0x00BB || c == 0x00BF || c == 0x00A1;
}

std::u32string strip_punct(std::u32string w) {
  std::size_t b = 0;
  while (b < w.size() && is_punct(w[b])) ++b;
  std::size_t e = w.size();
  while (e > b && is_punct(w[e - 1])) --e;
  return w.substr(b, e - b);
}

bool has_four_digits(std::string_view w) {
  int run = 0;
  for (char c : w) {
    run = std::isdigit(static_cast<unsigned char>(c)) ? run + 1 : 0;
    if (run == 4) return true;
  }
  return false;
}

}  // namespace

std::string strip_word(std::string_view raw) {
  std::u32string w = strip_punct(text::decode_utf8(raw));
  const std::size_t n = w.size();
  if (n >= 2 && (w[n - 1] == U's' || w[n - 1] == U'S') && (w[n - 2] == U'\'' || w[n - 2] == 0x2019)) {
    w = strip_punct(w.substr(0, n - 2));
  }
  return text::encode_utf8(w);
}

std::vector<std::string> harvest_words(std::string_view body) {
  std::vector<std::string> out;
  for (const auto& raw : text::split_whitespace(body)) {
    const std::string w = strip_word(raw);
    if (w.empty()) continue;
    const std::u32string u = text::decode_utf8(w);
    if (u.size() > 4 && text::is_upper(u.front()) && !is_stopword(text::lowercase(w))) out.push_back(w);
    if (has_four_digits(w)) out.push_back(w);
  }
  return out;
}

AvoidDict update_avoid(AvoidDict dict, std::string_view body) {
  for (const auto& w : harvest_words(body)) dict.add(w);
  return dict;
}

AvoidDict seed_avoid_dict(std::string_view sample_text) {
  AvoidDict dict = update_avoid({}, sample_text);
  dict.add("In the");
  dict.add("On the");
  return dict;
}

std::string_view scifi_system_prompt() { return embedded::scifi_system_v1; }

std::string render_scifi_user_prompt(const Combo& c, const std::vector<std::string>& avoid_words) {
  const std::vector<std::string> capped(avoid_words.begin(),
                                        avoid_words.begin() + static_cast<std::ptrdiff_t>(std::min(avoid_words.size(), kAvoidWordCap)));
  return text::render_template(embedded::scifi_user_v1, {{"STYLE", c.style},
                                                         {"MOOD", c.mood},
                                                         {"THEME1", c.theme1},
                                                         {"THEME2", c.theme2},
                                                         {"SETTING", c.setting},
                                                         {"QUESTION", c.qa.question},
                                                         {"ANSWER", c.qa.answer},
                                                         {"AVOID_WORDS", text::join(capped, ", ")}});
}

std::string short_name(std::string_view entry) {
  const auto colon = entry.find(':');
  return text::trim(colon == std::string_view::npos ? entry : entry.substr(0, colon));
}

json GeneratedRecord::to_json() const {
  return {{"id", id},
          {"text", text},
          {"label", label},
          {"style", combo.style},
          {"mood", combo.mood},
          {"theme1", combo.theme1},
          {"theme2", combo.theme2},
          {"setting", combo.setting},
          {"question", combo.qa.question},
          {"answer", combo.qa.answer}};
}

std::string GenerationResult::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    out += r.to_json().dump();
    out.push_back('\n');
  }
  return out;
}

json GenerationResult::metadata() const {
  json failed = json::array();
  for (const auto& f : failures) failed.push_back({{"combo_index", f.combo_index}, {"error", f.error}});
  return {{"attempted", attempted},
          {"generated", records.size()},
          {"failures", std::move(failed)},
          {"avoid_words", avoid.most_common()},
          {"avoid_counts", avoid.counts()}};
}

GenerationResult generate(const GenSpec& spec, LlmBackend& backend) {
  auto combos = build_combos(spec);
  if (spec.max_docs && combos.size() > *spec.max_docs) combos.resize(*spec.max_docs);

  GenerationResult result;
  result.avoid = seed_avoid_dict(spec.sample_text);
  result.attempted = combos.size();
  const std::string system(scifi_system_prompt());
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const auto& c = combos[i];
    char id[32];
    std::snprintf(id, sizeof id, "scifi-%05zu", i);
    LlmRequest req{system, render_scifi_user_prompt(c, result.avoid.most_common(kAvoidWordCap)), id};
    std::string response;
    try {
      response = backend.complete(req);
    } catch (const Error& e) {
      result.failures.push_back({i, e.what()});
      continue;
    }
    result.avoid = update_avoid(std::move(result.avoid), response);
    GeneratedRecord rec;
    rec.id = id;
    rec.text = std::move(response);
    rec.label = spec.label_rule == LabelRule::theme1 ? short_name(c.theme1)
                                                     : short_name(c.theme1) + " | " + short_name(c.theme2);
    rec.combo = c;
    result.records.push_back(std::move(rec));
  }
  return result;
}

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string syllable(std::size_t i) {
  return {kConsonants[(i / kVowels.size()) % kConsonants.size()], kVowels[i % kVowels.size()]};
}

constexpr std::size_t kSyllables = kConsonants.size() * kVowels.size();

std::string invented_name(Rng& rng, int syllables) {
  std::string s;
  for (int i = 0; i < syllables; ++i) s += syllable(rng.index(kSyllables));
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string prompt_field(std::string_view prompt, std::string_view key) {
  const auto p = prompt.find(key);
  if (p == std::string_view::npos) return {};
  const auto b = p + key.size();
  const auto e = prompt.find('\n', b);
  return text::trim(prompt.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
}

}  // namespace

std::string MockSciFiBackend::complete(const LlmRequest& request) {
  Rng rng(fnv1a(request.user));
  std::set<std::string> avoid;
  for (const auto& w : text::split_whitespace(prompt_field(request.user, "Words to avoid:"))) {
    avoid.insert(strip_word(w));
  }
  auto fresh_name = [&](int syllables) {
    std::string n;
    do {
      n = invented_name(rng, syllables);
    } while (avoid.count(n));
    avoid.insert(n);
    return n;
  };
  std::string year;
  do {
    year = std::to_string(2100 + rng.index(900));
  } while (avoid.count(year));

  const std::string hero = fresh_name(3);
  const std::string ship = fresh_name(3);
  const std::string being = fresh_name(4);
  const std::string theme = text::lowercase(prompt_field(request.user, "Theme 1:"));
  const std::string setting = text::lowercase(short_name(prompt_field(request.user, "Setting:")));
  const std::string mood = text::lowercase(prompt_field(request.user, "Mood:"));

  return hero + " serves aboard the " + ship + " among " + setting + " when a signal from the " + being +
         " arrives in " + year + ". The encounter turns on " + theme + " The crew remains " + mood +
         " as " + hero + " learns that " + text::lowercase(prompt_field(request.user, "Answer:")) +
         " The story ends with the " + being + " and humanity reaching an uneasy understanding.";
}

std::vector<std::string> planted_vocabulary(int topic, int words_per_topic) {
  std::vector<std::string> words;
  for (int i = 0; i < words_per_topic; ++i) {
    const auto n = static_cast<std::size_t>(i);
    words.push_back(syllable(static_cast<std::size_t>(topic)) + syllable(n / kSyllables) + syllable(n % kSyllables));
  }
  return words;
}

std::vector<Document> planted_documents(const PlantedSpec& spec) {
  if (spec.topics < 1 || spec.docs < 1 || spec.doc_length < 1 || spec.words_per_topic < 1) {
    throw ValidationError("planted corpus sizes must be positive");
  }
  if (static_cast<std::size_t>(spec.topics) > kSyllables) throw ValidationError("too many planted topics");
  if (!(spec.mix >= 0.0 && spec.mix <= 1.0)) throw ValidationError("planted mix must lie in [0, 1]");
  std::vector<std::vector<std::string>> vocab;
  for (int t = 0; t < spec.topics; ++t) vocab.push_back(planted_vocabulary(t, spec.words_per_topic));

  Rng rng(spec.seed);
  std::vector<Document> docs;
  for (int d = 0; d < spec.docs; ++d) {
    const auto topic = rng.index(static_cast<std::size_t>(spec.topics));
    std::vector<std::string> words;
    for (int i = 0; i < spec.doc_length; ++i) {
      const auto source = rng.uniform() < spec.mix ? rng.index(static_cast<std::size_t>(spec.topics)) : topic;
      words.push_back(vocab[source][rng.index(vocab[source].size())]);
    }
    char id[32];
    std::snprintf(id, sizeof id, "p%05d", d);
    docs.push_back(make_document(id, text::join(words, " "), "planted_" + std::to_string(topic)));
  }
  return docs;
}

}  // namespace bass
