#include "support.hpp"

#include "bass/common.hpp"
#include "bass/io.hpp"

namespace testing_support {

nlohmann::json load_schema(const std::string& name) {
  return nlohmann::json::parse(bass::io::read_file(source_dir() / "schemas" / (name + ".schema.json")));
}

std::vector<bass::Document> three_topic_docs(int docs_per_topic, std::uint64_t seed) {
  static const std::vector<std::vector<std::string>> words = {
      {"farm", "crop", "harvest", "tractor", "wheat", "barley", "soil", "irrigation", "cattle", "dairy"},
      {"missile", "navy", "army", "soldier", "weapon", "defense", "troops", "aircraft", "combat", "veteran"},
      {"school", "teacher", "student", "classroom", "tuition", "college", "education", "reading", "curriculum", "grant"}};
  static const std::vector<std::string> labels = {"agriculture", "defense", "education"};
  bass::Rng rng(seed);
  std::vector<bass::Document> out;
  for (int i = 0; i < 3 * docs_per_topic; ++i) {
    const auto t = static_cast<std::size_t>(i % 3);
    std::string text;
    for (int w = 0; w < 20; ++w) {
      const auto& pool = rng.uniform() < 0.85 ? words[t] : words[rng.index(3)];
      text += (w ? " " : "") + pool[rng.index(pool.size())];
    }
    char id[16];
    std::snprintf(id, sizeof id, "d%03d", i);
    out.push_back(bass::make_document(id, text, labels[t]));
  }
  return out;
}

}  // namespace testing_support
