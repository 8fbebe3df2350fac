// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

#include "bookmarks/bank.hpp"
#include "bookmarks/error.hpp"
#include "bookmarks/spans.hpp"
#include "bookmarks/text.hpp"
#include "support.hpp"

namespace bookmarks {
namespace {

// --- tokens --------------------------------------------------------------

TEST(NormalizeTokens, DropsStopWordsAndPossessives) {
  EXPECT_EQ(normalize_tokens("How does Arisa react to Kasumi's plans?"),
            (TokenSet{"arisa", "react", "kasumi", "plans"}));
  EXPECT_EQ(normalize_tokens("How does Arisa react to Kasumi\xE2\x80\x99s plans?"),
            (TokenSet{"arisa", "react", "kasumi", "plans"}));
}

TEST(NormalizeTokens, EmptyCases) {
  EXPECT_TRUE(normalize_tokens("the of and").empty());
  EXPECT_TRUE(normalize_tokens("").empty());
  EXPECT_TRUE(normalize_tokens("?!... --").empty());
}

TEST(NormalizeTokens, AgreesWithHandTokenizer) {
  // Independent tokenizer: split on ASCII non-alphanumerics, lowercase,
  // drop the shipped stop words. Valid for apostrophe-free ASCII input.
  auto hand = [](const std::string& s) {
    TokenSet out;
    std::string word;
    auto flush = [&] {
      if (!word.empty() && !is_stop_word(word)) out.insert(word);
      word.clear();
    };
    for (char c : s) {
      if (std::isalnum(static_cast<unsigned char>(c))) {
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      } else {
        flush();
      }
    }
    flush();
    return out;
  };
  for (const char* s : {"Where is Kasumi right now?", "What is the Star Festival about, really?",
                        "How does Tae speak when she is excited", "ARISA plays KEYBOARD in the band"}) {
    EXPECT_EQ(normalize_tokens(s), hand(s)) << s;
  }
}

TEST(StopWords, ListIsFixedAndLowercase) {
  EXPECT_GE(stop_words().size(), 120u);
  for (auto w : stop_words()) {
    EXPECT_EQ(to_lower(w), std::string(w));
    EXPECT_TRUE(is_stop_word(w));
  }
  EXPECT_FALSE(is_stop_word("kasumi"));
}

TEST(OverlapScore, Examples) {
  EXPECT_DOUBLE_EQ(overlap_score({"a", "b"}, {"a", "b"}), 1.0);
  EXPECT_DOUBLE_EQ(overlap_score({"a"}, {"b"}), 0.0);
  EXPECT_DOUBLE_EQ(overlap_score({}, {}), 0.0);
  EXPECT_DOUBLE_EQ(overlap_score({"arisa", "react", "plans"}, {"arisa", "plans", "kasumi"}), 0.5);
}

TEST(ConceptKeywords, TokensMinusScaffoldingPlusQuotedPhrases) {
  EXPECT_EQ(concept_keywords("What is \"Azure Key\"?"),
            (std::vector<std::string>{"azure", "azure key", "key"}));
  EXPECT_EQ(concept_keywords("What does the term Ryuseido mean?"), (std::vector<std::string>{"ryuseido"}));
  EXPECT_TRUE(contains_any_keyword("the AZURE key opens it", {"azure key"}));
  EXPECT_FALSE(contains_any_keyword("nothing here", {"azure"}));
}

// --- spans ---------------------------------------------------------------

TEST(MergeSpans, Examples) {
  EXPECT_EQ(merge_spans({{3, 7}, {5, 9}}), (std::vector<Span>{{3, 9}}));
  EXPECT_EQ(merge_spans({{2, 4}, {3, 5}, {11, 13}}), (std::vector<Span>{{2, 5}, {11, 13}}));
  EXPECT_EQ(merge_spans({{1, 2}, {3, 4}}), (std::vector<Span>{{1, 4}}));
  EXPECT_EQ(merge_spans({{1, 2}, {4, 4}}), (std::vector<Span>{{1, 2}, {4, 4}}));
  EXPECT_TRUE(merge_spans({}).empty());
}

std::vector<Span> runs_of(const std::set<std::size_t>& covered) {
  std::vector<Span> runs;
  for (std::size_t i : covered) {
    if (!runs.empty() && runs.back().end + 1 == i) {
      runs.back().end = i;
    } else {
      runs.push_back({i, i});
    }
  }
  return runs;
}

TEST(MergeSpans, EqualsIndexUnionRuns) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Span> spans;
    std::set<std::size_t> covered;
    const int n = static_cast<int>(rng() % 8);
    for (int k = 0; k < n; ++k) {
      const std::size_t a = 1 + rng() % 40;
      const std::size_t b = a + rng() % 6;
      spans.push_back({a, b});
      for (std::size_t i = a; i <= b; ++i) covered.insert(i);
    }
    ASSERT_EQ(merge_spans(spans), runs_of(covered));
  }
}

TEST(SpanAround, ClipsToBounds) {
  EXPECT_EQ(span_around(5, 2, 1, 100), (Span{3, 7}));
  EXPECT_EQ(span_around(2, 2, 1, 100), (Span{1, 4}));
  EXPECT_EQ(span_around(9, 2, 8, 10), (Span{8, 10}));
}

// --- bank ----------------------------------------------------------------

Bookmark stored(MemoryBank& bank, std::string q, BookmarkKind kind, std::size_t p,
                std::optional<std::string> subject = std::nullopt) {
  Bookmark b = create_bookmark(std::move(q), kind, std::move(subject));
  b.sync_point = p;
  const BookmarkId id = bank.insert(b);
  return bank.get(id);
}

TEST(CreateBookmark, Defaults) {
  const Bookmark b = create_bookmark("Where is Kasumi now?", BookmarkKind::kState);
  EXPECT_EQ(b.answer, "Unknown");
  EXPECT_EQ(b.sync_point, 0u);
  EXPECT_TRUE(b.unknown());
  EXPECT_EQ(std::get<StateAux>(b.aux).last_boundary, 0u);
}

TEST(CreateBookmark, BehavioralNeedsSubject) {
  const Bookmark b =
      create_bookmark("How does Arisa respond to Kasumi's plans?", BookmarkKind::kBehavioral, "Arisa");
  EXPECT_EQ(b.subject, "Arisa");
  EXPECT_THROW(create_bookmark("How does she act?", BookmarkKind::kBehavioral), Error);
  MemoryBank bank;
  Bookmark bad = create_bookmark("x", BookmarkKind::kState);
  bad.kind = BookmarkKind::kBehavioral;
  bad.aux = BehavioralAux{};
  EXPECT_THROW(bank.insert(bad), Error);
}

TEST(MemoryBank, AssignsIdsAndIndexesByKind) {
  MemoryBank bank;
  const auto a = stored(bank, "Where is Kasumi?", BookmarkKind::kState, 0);
  const auto b = stored(bank, "What is Ryuseido?", BookmarkKind::kConcept, 0);
  const auto c = stored(bank, "What is Kasumi doing?", BookmarkKind::kState, 0);
  EXPECT_EQ(a.id, 1u);
  EXPECT_EQ(b.id, 2u);
  EXPECT_EQ(bank.ids_of(BookmarkKind::kState), (std::vector<BookmarkId>{1, 3}));
  EXPECT_EQ(bank.ids_of(BookmarkKind::kConcept), (std::vector<BookmarkId>{2}));
  EXPECT_TRUE(bank.ids_of(BookmarkKind::kBehavioral).empty());
  EXPECT_EQ(bank.get(c.id).question, "What is Kasumi doing?");
  EXPECT_THROW(bank.get(99), Error);
}

TEST(Prefilter, EmptyWhenNoSameKind) {
  MemoryBank bank;
  stored(bank, "Where is Kasumi?", BookmarkKind::kState, 0);
  EXPECT_TRUE(prefilter(bank, "What is Kasumi?", BookmarkKind::kConcept, 5).empty());
}

TEST(Prefilter, RanksAndCaps) {
  MemoryBank bank;
  // Query tokens {arisa, react, kasumi, plans}.
  const auto hi = stored(bank, "How does Arisa react to Kasumi's ideas?", BookmarkKind::kBehavioral, 0, "Arisa");  // 3/5
  const auto lo = stored(bank, "How does Arisa sing?", BookmarkKind::kBehavioral, 0, "Arisa");  // 1/5
  stored(bank, "How does Tae play?", BookmarkKind::kBehavioral, 0, "Tae");  // 0
  const auto got = prefilter(bank, "How does Arisa react to Kasumi's plans?", BookmarkKind::kBehavioral, 2);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].id, hi.id);
  EXPECT_DOUBLE_EQ(got[0].score, 0.6);
  EXPECT_EQ(got[1].id, lo.id);
  EXPECT_DOUBLE_EQ(got[1].score, 0.2);
  // Zero-score candidates are never returned even with room.
  EXPECT_EQ(prefilter(bank, "How does Arisa react to Kasumi's plans?", BookmarkKind::kBehavioral, 5).size(), 2u);
}

TEST(Prefilter, TieBreaksOnSyncPointThenId) {
  MemoryBank bank;
  const auto early = stored(bank, "Where is Kasumi going?", BookmarkKind::kState, 3);
  const auto late = stored(bank, "Where is Kasumi staying?", BookmarkKind::kState, 7);
  const auto got = prefilter(bank, "Where is Kasumi heading?", BookmarkKind::kState, 5);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_DOUBLE_EQ(got[0].score, got[1].score);
  EXPECT_EQ(got[0].id, late.id);
  EXPECT_EQ(got[1].id, early.id);
}

TEST(Prefilter, MatchesBruteForceRanking) {
  const std::vector<std::string> vocab = {"kasumi", "arisa", "tae", "rimi", "saaya", "stage",
                                          "song", "guitar", "festival", "plans"};
  std::mt19937 rng(3);
  auto random_question = [&] {
    std::string q = "How";
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < n; ++k) q += " " + vocab[rng() % vocab.size()];
    return q;
  };
  for (int trial = 0; trial < 200; ++trial) {
    MemoryBank bank;
    const int n = static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) {
      const auto kind = static_cast<BookmarkKind>(rng() % 3);
      stored(bank, random_question(), kind, rng() % 4,
             kind == BookmarkKind::kBehavioral ? std::optional<std::string>("Rimi") : std::nullopt);
    }
    const std::string query = random_question();
    const auto kind = static_cast<BookmarkKind>(rng() % 3);
    const std::size_t k_prime = 1 + rng() % 5;

    // Oracle: score every bookmark with an explicit set computation.
    const TokenSet qt = normalize_tokens(query);
    std::vector<std::tuple<double, std::size_t, BookmarkId>> all;
    for (const auto& [id, b] : bank.all()) {
      if (b.kind != kind) continue;
      const TokenSet bt = normalize_tokens(b.question);
      std::size_t inter = 0;
      for (const auto& t : qt) inter += bt.count(t);
      const std::size_t uni = qt.size() + bt.size() - inter;
      const double s = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
      if (s > 0) all.emplace_back(s, b.sync_point, id);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) > std::get<1>(b);
      return std::get<2>(a) < std::get<2>(b);
    });
    if (all.size() > k_prime) all.resize(k_prime);

    const auto got = prefilter(bank, query, kind, k_prime);
    ASSERT_EQ(got.size(), all.size());
    for (std::size_t r = 0; r < got.size(); ++r) {
      ASSERT_EQ(got[r].id, std::get<2>(all[r]));
      ASSERT_EQ(bank.get(got[r].id).kind, kind);
    }
  }
}

struct MatchFixture {
  MemoryBank bank;
  std::vector<Candidate> candidates;
  MatchFixture() {
    for (const char* q : {"Where is Kasumi now?", "Where is Kasumi heading?", "Where is Kasumi staying?"}) {
      const BookmarkId id = bank.insert(create_bookmark(q, BookmarkKind::kState));
      candidates.push_back({id, 0.5});
    }
  }
  RelationJudge scripted(std::vector<Relation> by_rank, std::vector<BookmarkId>* asked = nullptr) {
    return [this, by_rank, asked](std::string_view, const Bookmark& c) {
      if (asked) asked->push_back(c.id);
      for (std::size_t r = 0; r < candidates.size(); ++r) {
        if (candidates[r].id == c.id) return by_rank[r];
      }
      return Relation::kNone;
    };
  }
};

TEST(Match, EmptyCandidatesCreate) {
  MemoryBank bank;
  const auto out = match("q", bank, {}, [](std::string_view, const Bookmark&) { return Relation::kReuse; });
  EXPECT_TRUE(std::holds_alternative<CreateNew>(out));
}

TEST(Match, ReuseLaterInRankBeatsEarlierDerive) {
  MatchFixture f;
  const std::vector<Relation> verdicts = {Relation::kNone, Relation::kDerive, Relation::kReuse};
  // A one-pass scan would stop at rank 2 with Derive; the two-pass rule
  // prefers sharing the slot judged reusable.
  std::optional<MatchOutcome> one_pass;
  for (std::size_t r = 0; r < verdicts.size() && !one_pass; ++r) {
    if (verdicts[r] == Relation::kReuse) one_pass = Reuse{f.candidates[r].id};
    if (verdicts[r] == Relation::kDerive) one_pass = Derive{f.candidates[r].id};
  }
  ASSERT_TRUE(one_pass && std::holds_alternative<Derive>(*one_pass));

  const auto out = match("Where is Kasumi?", f.bank, f.candidates, f.scripted(verdicts));
  EXPECT_EQ(out, MatchOutcome(Reuse{f.candidates[2].id}));
}

TEST(Match, DeriveWhenNoReuse) {
  MatchFixture f;
  const auto out = match("q", f.bank, f.candidates,
                         f.scripted({Relation::kNone, Relation::kDerive, Relation::kDerive}));
  EXPECT_EQ(out, MatchOutcome(Derive{f.candidates[1].id}));
}

TEST(Match, FirstReuseStopsScanning) {
  MatchFixture f;
  std::vector<BookmarkId> asked;
  const auto out = match("q", f.bank, f.candidates,
                         f.scripted({Relation::kReuse, Relation::kReuse, Relation::kNone}, &asked));
  EXPECT_EQ(out, MatchOutcome(Reuse{f.candidates[0].id}));
  EXPECT_EQ(asked, (std::vector<BookmarkId>{f.candidates[0].id}));
}

TEST(Match, AblationPolicies) {
  MatchFixture f;
  std::vector<BookmarkId> asked;
  auto judge = f.scripted({Relation::kDerive, Relation::kReuse, Relation::kNone}, &asked);
  EXPECT_TRUE(std::holds_alternative<CreateNew>(
      match("q", f.bank, f.candidates, judge, MatchPolicy{true, false})));
  EXPECT_TRUE(asked.empty());
  auto derive_only = f.scripted({Relation::kDerive, Relation::kNone, Relation::kNone});
  EXPECT_TRUE(std::holds_alternative<CreateNew>(
      match("q", f.bank, f.candidates, derive_only, MatchPolicy{false, true})));
  EXPECT_EQ(match("q", f.bank, f.candidates, judge, MatchPolicy{false, true}),
            MatchOutcome(Reuse{f.candidates[1].id}));
}

TEST(DeriveBookmark, UnknownParentSkipsInitializer) {
  Bookmark parent = create_bookmark("Where is the band?", BookmarkKind::kState);
  parent.id = 4;
  bool called = false;
  const Bookmark child = derive_bookmark(parent, "Where is Kasumi?", BookmarkKind::kState, std::nullopt,
                                         [&](const Bookmark&, std::string_view) {
                                           called = true;
                                           return std::string("x");
                                         });
  EXPECT_FALSE(called);
  EXPECT_EQ(child.answer, "Unknown");
  EXPECT_EQ(child.sync_point, 0u);
  EXPECT_EQ(child.parent, 4u);
}

TEST(DeriveBookmark, InheritsPointAndResetsAux) {
  Bookmark parent = create_bookmark("What is the band's current goal?", BookmarkKind::kState);
  parent.id = 9;
  parent.answer = "Win the Star Festival slot";
  parent.sync_point = 40;
  parent.aux = StateAux{40};
  const Bookmark child = derive_bookmark(
      parent, "What is Kasumi's current goal?", BookmarkKind::kState, std::nullopt,
      [](const Bookmark& p, std::string_view q) { return "From '" + p.answer + "' for " + std::string(q); });
  EXPECT_EQ(child.sync_point, 40u);
  EXPECT_EQ(child.answer, "From 'Win the Star Festival slot' for What is Kasumi's current goal?");
  EXPECT_EQ(std::get<StateAux>(child.aux).last_boundary, 40u);
  EXPECT_EQ(child.parent, 9u);
}

TEST(DeriveBookmark, CrossKindTakesRequestedKind) {
  Bookmark parent = create_bookmark("What is \"Ryuseido\"?", BookmarkKind::kConcept);
  parent.answer = "A rehearsal basement";
  parent.sync_point = 12;
  parent.aux = ConceptAux{{{3, 7}}, {"ryuseido"}};
  const Bookmark child = derive_bookmark(parent, "What is \"Star Festival\"?", BookmarkKind::kConcept,
                                         std::nullopt,
                                         [](const Bookmark& p, std::string_view) { return p.answer; });
  const auto& aux = std::get<ConceptAux>(child.aux);
  EXPECT_TRUE(aux.spans.empty());
  EXPECT_EQ(aux.keywords, (std::vector<std::string>{"festival", "star", "star festival"}));

  const Bookmark state = derive_bookmark(parent, "Where is the band rehearsing?", BookmarkKind::kState,
                                         std::nullopt,
                                         [](const Bookmark& p, std::string_view) { return p.answer; });
  EXPECT_EQ(state.kind, BookmarkKind::kState);
  EXPECT_TRUE(std::holds_alternative<StateAux>(state.aux));
  EXPECT_EQ(state.sync_point, 12u);
}

TEST(BankPersistence, RoundTrips) {
  testing::TempDir dir("bank");
  MemoryBank empty;
  save_bank(empty, dir / "empty.json");
  EXPECT_EQ(load_bank(dir / "empty.json"), empty);

  MemoryBank bank;
  Bookmark s = create_bookmark("Where is Kasumi?", BookmarkKind::kState);
  s.answer = "At the Ryuseido";
  s.sync_point = 20;
  s.aux = StateAux{20};
  Bookmark b = create_bookmark("How does Arisa react?", BookmarkKind::kBehavioral, "Arisa");
  b.answer = "Grumbles, then helps";
  b.sync_point = 18;
  b.aux = BehavioralAux{{{3, "Hold on, \"we\" haven't..."}, {5, "Tonight?\nMy grandmother"}}};
  Bookmark c = create_bookmark("What is \"Star Festival\"?", BookmarkKind::kConcept);
  c.sync_point = 19;
  c.aux = ConceptAux{{{1, 4}, {7, 11}}, {"festival", "star", "star festival"}};
  bank.insert(s);
  bank.insert(b);
  const BookmarkId cid = bank.insert(c);
  Bookmark child = derive_bookmark(bank.get(cid), "What is the festival?", BookmarkKind::kConcept,
                                   std::nullopt, [](const Bookmark&, std::string_view) { return ""; });
  bank.insert(child);

  save_bank(bank, dir / "bank.json");
  const MemoryBank loaded = load_bank(dir / "bank.json");
  EXPECT_EQ(loaded, bank);
  EXPECT_EQ(loaded.next_id(), bank.next_id());
  EXPECT_EQ(loaded.ids_of(BookmarkKind::kConcept), bank.ids_of(BookmarkKind::kConcept));
  EXPECT_EQ(bank_to_json_text(loaded), bank_to_json_text(bank));
}

TEST(BankPersistence, RejectsUnknownSchema) {
  EXPECT_THROW(bank_from_json_text(R"({"schema_version": 99, "next_id": 1, "bookmarks": []})"), FormatError);
  EXPECT_THROW(bank_from_json_text("{"), FormatError);
}

}  // namespace
}  // namespace bookmarks
