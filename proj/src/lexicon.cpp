#include <span>
#include <string_view>

#include "detectllm/perturber.hpp"

namespace detectllm {

namespace {

// Common English words, most frequent first.
constexpr std::string_view kLexicon[] = {
    "the",       "of",        "and",        "to",        "in",         "is",        "that",      "for",
    "it",        "as",        "was",       "with",       "be",        "by",         "on",        "not",
    "he",        "this",      "are",       "or",         "his",       "from",       "at",        "which",
    "but",       "have",      "an",        "had",        "they",      "you",        "were",      "their",
    "one",       "all",       "we",        "can",        "her",       "has",        "there",     "been",
    "if",        "more",      "when",      "will",       "would",     "who",        "so",        "no",
    "she",       "other",     "its",       "may",        "these",     "what",       "them",      "than",
    "some",      "him",       "time",      "into",       "only",      "do",         "about",     "two",
    "then",      "first",     "could",     "our",        "any",       "new",        "like",      "most",
    "over",      "such",      "made",      "after",      "also",      "did",        "many",      "before",
    "must",      "through",   "years",     "where",      "much",      "your",       "way",       "well",
    "down",      "should",    "because",   "each",       "just",      "those",      "people",    "how",
    "too",       "little",    "state",     "good",       "very",      "make",       "world",     "still",
    "own",       "see",       "men",       "work",       "long",      "get",        "here",      "between",
    "both",      "life",      "being",     "under",      "never",     "day",        "same",      "another",
    "know",      "while",     "last",      "might",      "us",        "great",      "old",       "year",
    "off",       "come",      "since",     "against",    "go",        "came",       "right",     "used",
    "take",      "three",     "small",     "house",      "number",    "however",    "part",      "place",
    "found",     "without",   "again",     "home",       "around",    "water",      "system",    "public",
    "general",   "city",      "country",   "during",     "school",    "second",     "several",   "night",
    "morning",   "government","question",  "important",  "different", "following",  "possible",  "business",
    "children",  "together",  "something", "certain",    "already",   "national",   "political", "economic",
    "information","development","community","experience","particular","especially","interest", "American",
    "president", "history",   "problem",   "service",    "program",   "family",     "market",    "company",
    "power",     "group",     "money",     "point",      "report",    "change",     "member",    "process",
    "action",    "office",    "order",     "story",      "street",    "field",      "table",     "light",
    "music",     "river",     "paper",     "voice",      "board",     "price",      "plant",     "movement",
    "student",   "teacher",   "doctor",    "afternoon",    "evening",   "weather",    "garden",    "window",
    "village",   "island",    "mountain",  "forest",     "kitchen",   "letter",     "picture",   "season",
    "animal",    "bird",      "horse",     "dog",        "cat",       "tree",       "road",      "car",
    "ship",      "train",     "bridge",    "tower",      "station",    "church",     "castle",    "harbor",
    "quickly",   "slowly",    "quietly",   "suddenly",   "finally",   "often",      "always",    "rarely",
    "early",     "late",      "soon",      "later",      "today",     "nearly",     "almost",    "really",
    "red",       "blue",      "green",     "white",      "black",     "bright",     "dark",      "warm",
    "cold",      "young",     "large",     "strong",     "simple",    "clear",      "happy",     "quiet",
    "ran",       "saw",       "gave",      "took",       "told",      "held",       "kept",      "left",
    "built",     "wrote",     "spoke",     "moved",      "opened",    "carried",    "walked",    "watched",
    "a",         "I",         "am",        "me",         "my",        "up",         "out",       "yes",
};

}  // namespace

std::span<const std::string_view> replacement_lexicon() { return kLexicon; }

}  // namespace detectllm
