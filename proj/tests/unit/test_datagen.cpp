#include <doctest.h>

#include <algorithm>
#include <memory>
#include <sstream>

#include "detectllm/datagen.hpp"
#include "detectllm/error.hpp"
#include "detectllm/text.hpp"
#include "detectllm/toy_model.hpp"
#include "support/synthetic_corpus.hpp"

using namespace detectllm;
using namespace detectllm::testing;

namespace {

std::shared_ptr<const ToyModel> model() {
    static const auto m = std::make_shared<const ToyModel>(ToyModel::train(synthetic_passages(40, 80, 1), 3, 0.01, 0));
    return m;
}

BuildOptions small_options() {
    BuildOptions o;
    o.prompt_tokens = 10;
    o.n_pairs = 8;
    o.min_len = 20;
    o.max_new_tokens = 40;
    o.seed = 5;
    return o;
}

}  // namespace

TEST_CASE("too few eligible texts is an insufficient corpus") {
    ToyBackend backend(model());
    auto texts = synthetic_passages(5, 80, 2);
    texts.push_back("too short to prompt");
    BuildOptions o = small_options();
    o.n_pairs = 10;
    try {
        build_pairs(texts, backend, DecodingConfig{}, o);
        FAIL("expected InsufficientCorpus");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientCorpus);
    }
}

TEST_CASE("pairs are deterministic and independent of the worker count") {
    ToyBackend backend(model());
    const auto texts = synthetic_passages(20, 80, 2);
    auto o = small_options();
    const auto cfg = DecodingConfig::top_k_sampling(40, 11);
    const auto a = build_pairs(texts, backend, cfg, o);
    o.workers = 4;
    const auto b = build_pairs(texts, backend, cfg, o);
    CHECK(a.pairs == b.pairs);
    CHECK(a.pairs.size() == 8);
    CHECK(std::is_sorted(a.pairs.begin(), a.pairs.end(),
                         [](const PairedSample& x, const PairedSample& y) { return x.id < y.id; }));
    o.seed = 6;
    CHECK(build_pairs(texts, backend, cfg, o).pairs != a.pairs);
}

TEST_CASE("both sides share the prompt and machine text differs from human text") {
    ToyBackend backend(model());
    const auto texts = synthetic_passages(20, 80, 2);
    const auto o = small_options();
    const auto d = build_pairs(texts, backend, DecodingConfig{}, o);
    for (const auto& p : d.pairs) {
        const auto prompt = split_words(p.prompt);
        const auto human = split_words(p.human_text);
        const auto machine = split_words(p.machine_text);
        CHECK(prompt.size() == o.prompt_tokens);
        CHECK(std::equal(prompt.begin(), prompt.end(), human.begin()));
        CHECK(std::equal(prompt.begin(), prompt.end(), machine.begin()));
        CHECK(p.machine_text != p.human_text);
        CHECK(machine.size() >= o.prompt_tokens + o.min_len);
        CHECK(human.size() <= machine.size());
        CHECK(p.backend_id == "toy");
    }
    CHECK(d.metadata.input_texts == 20);
    CHECK(d.metadata.eligible_texts == 20);
}

TEST_CASE("prompts are a sub-multiset of the corpus openings") {
    ToyBackend backend(model());
    const auto texts = synthetic_passages(30, 80, 4);
    const auto d = build_pairs(texts, backend, DecodingConfig::top_p_sampling(0.96, 1), small_options());
    std::vector<std::string> openings;
    for (const auto& t : texts) {
        auto w = split_words(t);
        w.resize(10);
        openings.push_back(join_words(w));
    }
    for (const auto& p : d.pairs) {
        auto it = std::find(openings.begin(), openings.end(), p.prompt);
        REQUIRE(it != openings.end());
        openings.erase(it);
    }
}

TEST_CASE("repetitive continuations are degenerate") {
    CHECK(is_degenerate_continuation({}));
    CHECK(is_degenerate_continuation({"a", "a", "a"}));
    CHECK(is_degenerate_continuation({"a", "b", "a", "b", "a"}));
    CHECK_FALSE(is_degenerate_continuation({"a"}));
    CHECK_FALSE(is_degenerate_continuation({"a", "b", "c", "a"}));
}

TEST_CASE("greedy decoding on a looping model skips degenerate samples") {
    auto looping = std::make_shared<const ToyModel>(ToyModel::train({"x y x y x y x y x y x y"}, 2, 0.01, 0));
    ToyBackend backend(looping);
    std::vector<std::string> texts(5, "x y x y x y x y x y x y x y x y x y x y");
    BuildOptions o;
    o.prompt_tokens = 2;
    o.min_len = 5;
    o.max_new_tokens = 10;
    o.n_pairs = 1;
    CHECK_THROWS_AS(build_pairs(texts, backend, DecodingConfig::greedy_decoding(), o), Error);
}

TEST_CASE("dataset JSONL round-trips") {
    ToyBackend backend(model());
    const auto d = build_pairs(synthetic_passages(20, 80, 2), backend, DecodingConfig::top_k_sampling(), small_options());
    std::stringstream io;
    write_dataset_jsonl(io, d.pairs);
    CHECK(read_dataset_jsonl(io) == d.pairs);
    const auto meta = metadata_to_json(d.metadata);
    CHECK(meta.at("prompt_tokens") == 10);
    CHECK(meta.contains("skipped"));

    std::istringstream bad("{\"id\": 1}\n");
    try {
        read_dataset_jsonl(bad);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
    }
}

TEST_CASE("text normalisation") {
    CHECK(normalize_text("  a \t b\n\nc  ") == "a b c");
    CHECK(normalize_text("cafe\xCC\x81") == "caf\xC3\xA9");
}

TEST_CASE("option validation") {
    ToyBackend backend(model());
    const auto texts = synthetic_passages(20, 80, 2);
    auto o = small_options();
    o.max_new_tokens = 5;
    CHECK_THROWS_AS(build_pairs(texts, backend, DecodingConfig{}, o), Error);
    o = small_options();
    o.n_pairs = 0;
    CHECK_THROWS_AS(build_pairs(texts, backend, DecodingConfig{}, o), Error);
}
