#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "detectllm/error.hpp"
#include "detectllm/text.hpp"
#include "detectllm/toy_model.hpp"
#include "support/synthetic_corpus.hpp"

using namespace detectllm;

namespace {

std::string data_path(const char* name) { return std::string(DETECTLLM_TEST_DATA_DIR) + "/" + name; }

std::shared_ptr<const ToyModel> fixture_model() {
    static const auto model =
        std::make_shared<const ToyModel>(ToyModel::train(testing::read_lines(data_path("fixture_corpus.txt")), 3, 0.1, 0));
    return model;
}

struct Expected {
    const char* token;
    double log_prob;
    std::int64_t rank;
    double entropy;
};

void check_against(const TextStats& s, const std::vector<Expected>& want) {
    REQUIRE(s.tokens.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CAPTURE(i);
        CHECK(s.tokens[i].token == want[i].token);
        CHECK(std::abs(s.tokens[i].log_prob - want[i].log_prob) <= 1e-9);
        CHECK(s.tokens[i].rank == want[i].rank);
        CHECK(std::abs(s.tokens[i].entropy - want[i].entropy) <= 1e-9);
    }
}

}  // namespace

TEST_CASE("bigram smoothing on a two-word corpus") {
    const double alpha = 0.5;
    const auto model = ToyModel::train({"a b a b"}, 2, alpha, 0);
    CHECK(model.vocab_size() == 4);  // a b </s> <unk>
    const std::vector<ToyModel::TokenId> history = {model.lookup("a")};
    const auto d = model.distribution(history);
    CHECK(d.prob(model.lookup("b")) == doctest::Approx((2 + alpha) / (2 + alpha * 4)).epsilon(1e-15));
    CHECK(d.prob(model.lookup("a")) == doctest::Approx(alpha / (2 + alpha * 4)).epsilon(1e-15));
    CHECK(model.lookup("zebra") == model.unk_id());
}

TEST_CASE("order 1 ignores context") {
    const auto model = ToyModel::train({"x y y z", "y z"}, 1, 1.0, 0);
    const auto a = model.dense_distribution(std::vector<ToyModel::TokenId>{model.lookup("x")});
    const auto b = model.dense_distribution(std::vector<ToyModel::TokenId>{model.lookup("z"), model.lookup("y")});
    CHECK(a == b);
}

TEST_CASE("training is deterministic and serialisation round-trips byte for byte") {
    const auto lines = testing::read_lines(data_path("fixture_corpus.txt"));
    const auto a = ToyModel::train(lines, 3, 0.1, 11);
    const auto b = ToyModel::train(lines, 3, 0.1, 11);
    CHECK(a.to_json() == b.to_json());
    const auto c = ToyModel::from_json(a.to_json());
    CHECK(c == a);
    CHECK(c.to_json() == a.to_json());

    const auto path = std::filesystem::temp_directory_path() / "detectllm_toy_roundtrip.json";
    a.save(path.string());
    CHECK(ToyModel::load(path.string()) == a);
    std::filesystem::remove(path);
}

TEST_CASE("training rejects empty corpora and bad parameters") {
    CHECK_THROWS_AS(ToyModel::train({}, 2, 1.0, 0), Error);
    try {
        ToyModel::train({"   ", ""}, 2, 1.0, 0);
        FAIL("expected EmptyCorpus");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyCorpus);
    }
    try {
        ToyModel::train({"a b"}, 0, 1.0, 0);
        FAIL("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
    CHECK_THROWS_AS(ToyModel::train({"a b"}, 2, 0.0, 0), Error);
}

TEST_CASE("scores match the frozen reference implementation") {
    ToyBackend backend(fixture_model());
    CHECK(fixture_model()->vocab_size() == 135);

    const auto s1 = backend.score("the pilot told the captain about the fog .");
    CHECK(s1.vocab_size == 135);
    check_against(s1, {
                          {"the", -0.5647470405598106, 1, 2.438181008904489},
                          {"pilot", -2.2727321298443646, 2, 3.6554902794855684},
                          {"told", -2.875104285765376, 1, 4.461404235462762},
                          {"the", -2.5788384696222035, 1, 4.7948244458634575},
                          {"captain", -2.5788384696222035, 1, 4.794824445863455},
                          {"about", -2.972742755329292, 1, 4.3891739164706545},
                          {"the", -2.5788384696222035, 1, 4.7948244458634575},
                          {"fog", -2.645529844120876, 1, 4.7030786911027045},
                          {".", -2.645529844120876, 1, 4.703078691102705},
                      });

    const auto s2 = backend.score("the captain walked to the hill .");
    check_against(s2, {
                          {"the", -0.5647470405598106, 1, 2.438181008904489},
                          {"captain", -2.093683898395379, 1, 3.6554902794855684},
                          {"walked", -5.3706380281276624, 9, 4.3891739164706545},
                          {"to", -2.70805020110221, 1, 4.626366419340911},
                          {"the", -2.5788384696222035, 1, 4.7948244458634575},
                          {"hill", -2.875104285765376, 1, 4.461404235462762},
                          {".", -2.7668907011251433, 1, 4.561886591048495},
                      });
}

TEST_CASE("sparse statistics agree with dense enumeration") {
    const auto model = fixture_model();
    const auto lines = testing::read_lines(data_path("fixture_corpus.txt"));
    for (std::size_t line = 0; line < lines.size(); line += 7) {
        std::vector<ToyModel::TokenId> ids;
        for (const auto& w : split_words(lines[line])) ids.push_back(model->lookup(w));
        ids.push_back(model->lookup("unseenword"));
        for (std::size_t pos = 0; pos < ids.size(); ++pos) {
            const std::span<const ToyModel::TokenId> history(ids.data(), pos);
            const auto dense = model->dense_distribution(history);
            double total = 0.0;
            for (double p : dense) total += p;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            const auto want = token_stats_from_probs(dense, static_cast<std::size_t>(ids[pos]));
            const auto got = model->stats_at(history, ids[pos]);
            CHECK(got.rank == want.rank);
            CHECK(got.log_prob == doctest::Approx(want.log_prob).epsilon(1e-12));
            CHECK(got.entropy == doctest::Approx(want.entropy).epsilon(1e-10));
        }
    }
}

TEST_CASE("greedy continuations have rank 1 at every generated position") {
    ToyBackend backend(fixture_model());
    const std::string prompt = "the ferry";
    const std::string cont = backend.generate(prompt, 20, DecodingConfig::greedy_decoding());
    REQUIRE_FALSE(cont.empty());
    const auto stats = backend.score(backend.join(prompt, cont));
    for (std::size_t i = 2; i < stats.tokens.size(); ++i) CHECK(stats.tokens[i].rank == 1);
}

TEST_CASE("seeded generation is reproducible") {
    ToyBackend backend(fixture_model());
    auto cfg = DecodingConfig::top_k_sampling(40, 99);
    const auto a = backend.generate("the captain", 30, cfg);
    const auto b = backend.generate("the captain", 30, cfg);
    CHECK(a == b);
    cfg.seed = 100;
    std::size_t differing = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        cfg.seed = 1000 + s;
        differing += backend.generate("the captain", 30, cfg) != a;
    }
    CHECK(differing > 0);
}

TEST_CASE("generate validates its arguments") {
    ToyBackend backend(fixture_model());
    CHECK_THROWS_AS(backend.generate("", 5, DecodingConfig{}), Error);
    CHECK_THROWS_AS(backend.generate("the", 0, DecodingConfig{}), Error);
    DecodingConfig bad;
    bad.k = 5;
    CHECK_THROWS_AS(backend.generate("the", 5, bad), Error);
}

TEST_CASE("scoring needs two tokens and honours the length cap") {
    ToyBackend backend(fixture_model());
    try {
        backend.score("lonely");
        FAIL("expected TextTooShort");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TextTooShort);
    }
    std::string long_text;
    for (int i = 0; i < 20; ++i) long_text += "the ferry crossed the river . ";
    backend.set_max_scored_tokens(10);
    const auto s = backend.score(long_text);
    CHECK(s.tokens.size() == 10);
    CHECK(s.truncated_from == 120);
}

TEST_CASE("out-of-vocabulary words are scored as <unk>") {
    ToyBackend backend(fixture_model());
    const auto s = backend.score("the zeppelin crossed");
    REQUIRE(s.tokens.size() == 3);
    CHECK(s.tokens[1].token == "zeppelin");
    CHECK(s.tokens[1].log_prob < s.tokens[0].log_prob);
}

TEST_CASE("synthetic corpus generator is seeded") {
    const auto a = testing::synthetic_passages(5, 40, 1);
    const auto b = testing::synthetic_passages(5, 40, 1);
    const auto c = testing::synthetic_passages(5, 40, 2);
    CHECK(a == b);
    CHECK(a != c);
    for (const auto& p : a) CHECK(split_words(p).size() >= 40);
}
