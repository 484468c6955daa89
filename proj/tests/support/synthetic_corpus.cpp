#include "synthetic_corpus.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string_view>

#include "detectllm/rng.hpp"

namespace detectllm::testing {

namespace {

using Words = std::vector<std::string_view>;

const Words kDeterminers = {"the", "a", "this", "every", "one", "that", "another", "no"};
const Words kAdjectives = {"old",    "new",     "small",  "large",   "quiet",   "busy",    "early",  "late",
                           "local",  "public",  "young",  "bright",  "dark",    "narrow",  "wide",   "cold",
                           "warm",   "strange", "simple", "careful", "angry",   "patient", "famous", "hidden",
                           "broken", "empty",   "heavy",  "sudden",  "gentle",  "distant", "modern", "ancient",
                           "rural",  "urban",   "weekly", "annual",  "private", "formal",  "honest", "silent"};
const Words kNouns = {"council", "report",   "village",  "river",    "market",  "teacher", "farmer",  "doctor",
                      "station", "bridge",   "company",  "letter",   "meeting", "school",  "minister", "police",
                      "storm",   "harbor",   "festival", "museum",   "train",   "road",    "garden",  "church",
                      "crowd",   "judge",    "student",  "engineer", "nurse",   "captain", "soldier", "writer",
                      "painter", "mayor",    "factory",  "hospital", "library", "castle",  "island",  "forest",
                      "budget",  "election", "plan",     "project",  "strike",  "protest", "victory", "defeat",
                      "season",  "match",    "team",     "coach",    "player",  "ticket",  "price",   "tax",
                      "law",     "court",    "prison",   "window",   "door",    "kitchen", "story",   "song",
                      "film",    "book",     "paper",    "camera",   "phone",   "engine",  "ship",    "plane",
                      "horse",   "dog",      "family",   "friend",   "neighbor", "visitor", "tourist", "reporter"};
const Words kNames = {"Anna",   "Peter",  "Maria",  "James",  "Elena",  "Tom",    "Sara",  "David", "Laura",
                      "Martin", "Olivia", "Henry",  "Grace",  "Samuel", "Nora",   "Lucas", "Emma",  "Oscar",
                      "Clara",  "Felix",  "Julia",  "Victor", "Irene",  "Hugo",   "Alice"};
const Words kTransitive = {"visited",  "closed",   "opened",    "praised",   "criticised", "found",    "lost",
                           "built",    "repaired", "inspected", "described", "ignored",    "approved", "rejected",
                           "watched",  "followed", "helped",    "warned",    "thanked",    "blamed",   "invited",
                           "joined",   "left",     "reached",   "crossed",   "painted",    "wrote",    "read",
                           "sold",     "bought",   "moved",     "carried",   "protected",  "defended", "attacked",
                           "replaced", "studied",  "announced", "cancelled", "delayed",    "funded",   "launched",
                           "reported", "recorded", "measured",  "opposed",   "supported",  "welcomed", "questioned",
                           "examined"};
const Words kIntransitive = {"arrived", "waited",   "returned", "slept",    "laughed",  "complained", "agreed",
                             "resigned", "collapsed", "improved", "recovered", "celebrated", "protested", "travelled",
                             "vanished", "appeared",  "spoke",    "failed",   "succeeded", "paused"};
const Words kPrepositions = {"near",  "behind", "inside", "outside", "across", "under",
                             "above", "beside", "beyond", "through", "after",  "before"};
const Words kAdverbs = {"yesterday", "today",  "later",     "meanwhile", "suddenly", "eventually", "recently",
                        "finally",   "again",  "sometimes", "often",     "rarely",   "quietly",    "quickly",
                        "slowly",    "openly", "briefly",   "anyway",    "instead",  "however"};
const Words kConjunctions = {"and", "but", "while", "because", "although", "so"};
const Words kReporting = {"said", "claimed", "insisted", "admitted", "explained", "argued"};

class Grammar {
public:
    explicit Grammar(std::uint64_t seed) : rng_(seed) {}

    void sentence(std::vector<std::string_view>& out) {
        switch (pick_pattern({30, 20, 15, 12, 12, 11})) {
            case 0: noun_phrase(out); transitive(out); break;
            case 1: noun_phrase(out); transitive(out); prepositional(out); break;
            case 2: noun_phrase(out); out.push_back(word(kIntransitive)); prepositional(out); break;
            case 3:
                out.push_back(word(kAdverbs));
                out.push_back(",");
                noun_phrase(out);
                transitive(out);
                break;
            case 4:
                noun_phrase(out);
                transitive(out);
                out.push_back(word(kConjunctions));
                noun_phrase(out);
                out.push_back(word(kIntransitive));
                break;
            default:
                noun_phrase(out);
                out.push_back(word(kReporting));
                out.push_back("that");
                noun_phrase(out);
                transitive(out);
                break;
        }
        out.push_back(".");
    }

private:
    std::string_view word(const Words& list) {
        // Zipf weights 1 / (i + 1).
        double total = 0.0;
        for (std::size_t i = 0; i < list.size(); ++i) total += 1.0 / static_cast<double>(i + 1);
        double u = rng_.uniform() * total;
        for (std::size_t i = 0; i < list.size(); ++i) {
            u -= 1.0 / static_cast<double>(i + 1);
            if (u < 0.0) return list[i];
        }
        return list.back();
    }

    std::size_t pick_pattern(std::initializer_list<int> weights) {
        int total = 0;
        for (int w : weights) total += w;
        auto u = static_cast<int>(rng_.below(static_cast<std::uint64_t>(total)));
        std::size_t i = 0;
        for (int w : weights) {
            if (u < w) return i;
            u -= w;
            ++i;
        }
        return i - 1;
    }

    void noun_phrase(std::vector<std::string_view>& out) {
        switch (pick_pattern({45, 30, 15, 10})) {
            case 0: out.push_back(word(kDeterminers)); out.push_back(word(kNouns)); break;
            case 1:
                out.push_back(word(kDeterminers));
                out.push_back(word(kAdjectives));
                out.push_back(word(kNouns));
                break;
            case 2: out.push_back(word(kNames)); break;
            default:
                out.push_back(word(kDeterminers));
                out.push_back(word(kNouns));
                out.push_back("of");
                out.push_back("the");
                out.push_back(word(kNouns));
                break;
        }
    }

    void transitive(std::vector<std::string_view>& out) {
        out.push_back(word(kTransitive));
        noun_phrase(out);
    }

    void prepositional(std::vector<std::string_view>& out) {
        out.push_back(word(kPrepositions));
        noun_phrase(out);
    }

    Rng rng_;
};

}  // namespace

std::vector<std::string> synthetic_passages(std::size_t count, std::size_t min_words, std::uint64_t seed) {
    Grammar grammar(seed);
    std::vector<std::string> passages;
    passages.reserve(count);
    std::vector<std::string_view> tokens;
    for (std::size_t i = 0; i < count; ++i) {
        tokens.clear();
        while (tokens.size() < min_words) grammar.sentence(tokens);
        std::string text;
        for (std::size_t j = 0; j < tokens.size(); ++j) {
            if (j) text += ' ';
            text += tokens[j];
        }
        passages.push_back(std::move(text));
    }
    return passages;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    return lines;
}

}  // namespace detectllm::testing
