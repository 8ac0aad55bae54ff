#include <gtest/gtest.h>

#include "bass/corpus.hpp"
#include "bass/error.hpp"
#include "bass/io.hpp"
#include "bass/text.hpp"
#include "support.hpp"

using namespace bass;

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("The Clean Water Act"), (std::vector<std::string>{"clean", "water", "act"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("a an of").empty());
}

TEST(Tokenize, SplitsOnNonAlphabeticAndLowercases) {
  EXPECT_EQ(tokenize("H.R.1234: tax-credit FOR Caf\xC3\x89s!!"),
            (std::vector<std::string>{"tax", "credit", "caf\xC3\xA9s"}));
  EXPECT_EQ(tokenize("ab abc x2y"), (std::vector<std::string>{"abc"}));
}

TEST(Tokenize, IdempotentOnJoinedOutput) {
  for (const char* s : {"The Clean Water Act of 1972", "Über-schnelle Züge; AND the Rest", "x y zzz, qq"}) {
    const auto once = tokenize(s);
    EXPECT_EQ(tokenize(text::join(once, " ")), once) << s;
  }
}

TEST(Stopwords, Versioned) {
  EXPECT_EQ(kStopwordVersion, std::string("en-v1"));
  EXPECT_TRUE(is_stopword("the"));
  EXPECT_FALSE(is_stopword("water"));
  EXPECT_GT(stopwords().size(), 100u);
}

TEST(Corpus, LoadsJsonl) {
  const auto c = parse_corpus_jsonl(
      "{\"id\":\"a\",\"text\":\"clean water\",\"label\":\"env\"}\n"
      "\n"
      "{\"id\":\"b\",\"text\":\"water rights\"}\n"
      "{\"id\":\"c\",\"text\":\"clean rights\",\"label\":null}\n");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.vocabulary(), (std::vector<std::string>{"clean", "rights", "water"}));
  EXPECT_EQ(c.label_set(), (std::vector<std::string>{"env"}));
  EXPECT_FALSE(c.fully_labeled());
  EXPECT_EQ(c.index_of("b"), 1u);
  EXPECT_THROW(c.index_of("zz"), LookupError);
  EXPECT_EQ(c.term_ids(0), (std::vector<int>{0, 2}));
  EXPECT_EQ(c.token_count(), 6u);
}

TEST(Corpus, MinDocFrequencyFilters) {
  const auto c = parse_corpus_jsonl(
      "{\"id\":\"a\",\"text\":\"alpha beta\"}\n{\"id\":\"b\",\"text\":\"alpha gamma\"}\n");
  EXPECT_EQ(c.vocabulary(), (std::vector<std::string>{"alpha"}));
  const auto all = parse_corpus_jsonl("{\"id\":\"a\",\"text\":\"alpha beta\"}\n", CorpusOptions{1});
  EXPECT_EQ(all.vocabulary().size(), 2u);
}

TEST(Corpus, DuplicateIdNamesTheId) {
  try {
    parse_corpus_jsonl("{\"id\":\"d1\",\"text\":\"x\"}\n{\"id\":\"d1\",\"text\":\"y\"}\n");
    FAIL();
  } catch (const DuplicateIdError& e) {
    EXPECT_EQ(e.id(), "d1");
    EXPECT_NE(std::string(e.what()).find("d1"), std::string::npos);
  }
}

TEST(Corpus, MalformedLineReportsLineNumber) {
  try {
    parse_corpus_jsonl("{\"id\":\"a\",\"text\":\"x\"}\n{oops\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.raw(), "{oops");
  }
  EXPECT_THROW(parse_corpus_jsonl("{\"id\":7,\"text\":\"x\"}\n"), ParseError);
  EXPECT_THROW(parse_corpus_jsonl("{\"id\":\"a\"}\n"), ParseError);
  EXPECT_THROW(parse_corpus_jsonl("\n\n"), ValidationError);
}

TEST(Corpus, SaveLoadIsIdentity) {
  testing_support::TempDir dir;
  const Corpus c(testing_support::three_topic_docs(5, 2));
  save_corpus(c, dir / "c.jsonl");
  const auto back = load_corpus(dir / "c.jsonl");
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.document(i).id, c.document(i).id);
    EXPECT_EQ(back.document(i).text, c.document(i).text);
    EXPECT_EQ(back.document(i).gold_label, c.document(i).gold_label);
    EXPECT_EQ(back.document(i).tokens, c.document(i).tokens);
  }
  EXPECT_EQ(back.vocabulary(), c.vocabulary());
  EXPECT_EQ(vocabulary_hash(back.vocabulary()), vocabulary_hash(c.vocabulary()));
}

TEST(Corpus, LoadTwiceGivesSameVocabulary) {
  const std::string content = corpus_to_jsonl(Corpus(testing_support::three_topic_docs(4, 9)));
  const auto a = parse_corpus_jsonl(content);
  const auto b = parse_corpus_jsonl(content);
  EXPECT_EQ(a.vocabulary(), b.vocabulary());
  for (const auto& w : a.vocabulary()) EXPECT_EQ(a.term_id(w), b.term_id(w));
}
