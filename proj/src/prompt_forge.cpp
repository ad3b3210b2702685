#include "editioner/prompt_forge.hpp"

#include "editioner/errors.hpp"
#include "editioner/tensor_store.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

namespace editioner::prompts {

namespace {

constexpr std::array<std::string_view, kSlotCount> kSlotNames = {"subject", "verb", "preposition", "object"};

std::size_t slot_index(Slot slot) { return static_cast<std::size_t>(slot); }

std::string join_words(const std::array<std::string, kSlotCount>& slots) {
    std::string text = slots[0];
    for (std::size_t s = 1; s < kSlotCount; ++s) {
        text += ' ';
        text += slots[s];
    }
    return text;
}

// Unbiased draw in [0, bound) from the raw 64-bit stream. The standard
// distributions are implementation-defined, this is not.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

std::size_t require_word(const WordList& words, const ConceptSpec& concept_spec) {
    const auto idx = words.index_of(concept_spec.slot, concept_spec.word);
    if (!idx) {
        throw ConfigError("'" + concept_spec.word + "' is not in the " + std::string(slot_name(concept_spec.slot)) +
                          " word list");
    }
    return *idx;
}

}  // namespace

std::string_view slot_name(Slot slot) { return kSlotNames[slot_index(slot)]; }

Slot parse_slot(std::string_view name) {
    for (std::size_t s = 0; s < kSlotCount; ++s) {
        if (kSlotNames[s] == name) return kSlots[s];
    }
    throw ConfigError("unknown template slot '" + std::string(name) + "'");
}

WordList::WordList(std::array<std::vector<std::string>, kSlotCount> words) : words_(std::move(words)) {
    for (std::size_t s = 0; s < kSlotCount; ++s) {
        if (words_[s].empty()) throw ConfigError(std::string("empty word list for slot ") + std::string(kSlotNames[s]));
        std::set<std::string_view> seen;
        for (const auto& w : words_[s]) {
            if (w.empty() || w.find_first_of(" \t\r\n") != std::string::npos) {
                throw ConfigError("word '" + w + "' in slot " + std::string(kSlotNames[s]) +
                                  " must be a single non-empty token");
            }
            if (!seen.insert(w).second) {
                throw ConfigError("duplicate word '" + w + "' in slot " + std::string(kSlotNames[s]));
            }
        }
    }
}

WordList WordList::defaults() {
    return WordList({{
        {"cat", "tiger", "dog", "car", "bus", "truck", "boy", "girl", "man"},
        {"sleeping", "exploring", "moving", "lounging", "lying", "gazing", "chasing", "stretching", "standing",
         "stalking", "leaping", "talking", "running", "jumping", "napping", "staying", "sitting", "smiling",
         "racing", "stopping", "waiting"},
        {"on", "with", "in", "over", "through", "out", "besides", "under"},
        {"ground", "sky", "river", "bed", "chair", "desk", "grass", "seat", "couch", "backyard", "garden",
         "house", "leaves", "road", "station", "path", "stop", "street", "yard", "field", "way"},
    }});
}

std::optional<std::size_t> WordList::index_of(Slot slot, std::string_view word) const {
    const auto& list = (*this)[slot];
    const auto it = std::find(list.begin(), list.end(), word);
    if (it == list.end()) return std::nullopt;
    return static_cast<std::size_t>(it - list.begin());
}

std::size_t WordList::combinations() const {
    std::size_t n = 1;
    for (const auto& list : words_) n *= list.size();
    return n;
}

WordList parse_wordlist(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("word list is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("word list must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        parse_slot(key);
        (void)value;
    }
    std::array<std::vector<std::string>, kSlotCount> words;
    for (std::size_t s = 0; s < kSlotCount; ++s) {
        const std::string key(kSlotNames[s]);
        if (!j.contains(key)) throw ConfigError("word list is missing slot '" + key + "'");
        if (!j[key].is_array()) throw ConfigError("word list slot '" + key + "' must be an array of strings");
        for (const auto& w : j[key]) {
            if (!w.is_string()) throw ConfigError("word list slot '" + key + "' must be an array of strings");
            words[s].push_back(w.get<std::string>());
        }
    }
    return WordList(std::move(words));
}

WordList load_wordlist(const std::filesystem::path& path) { return parse_wordlist(store::read_text_file(path)); }

std::string render_wordlist(const WordList& words) {
    nlohmann::ordered_json j;
    for (Slot s : kSlots) j[std::string(slot_name(s))] = words[s];
    return j.dump(2) + "\n";
}

ConceptSpec parse_concept(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == text.size()) {
        throw ConfigError("concept must look like slot=word, got '" + std::string(text) + "'");
    }
    return {parse_slot(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

std::string to_string(const ConceptSpec& concept_spec) {
    return std::string(slot_name(concept_spec.slot)) + "=" + concept_spec.word;
}

PromptCorpus generate_all(const WordList& words) {
    PromptCorpus corpus{words, {}};
    const auto& subjects = words[Slot::subject];
    const auto& verbs = words[Slot::verb];
    const auto& preps = words[Slot::preposition];
    const auto& objects = words[Slot::object];
    if (subjects.empty() || verbs.empty() || preps.empty() || objects.empty()) {
        throw ConfigError("every template slot needs at least one word");
    }
    corpus.records.reserve(words.combinations());
    std::size_t index = 0;
    for (const auto& s : subjects) {
        for (const auto& v : verbs) {
            for (const auto& p : preps) {
                for (const auto& o : objects) {
                    PromptRecord r;
                    r.slots = {s, v, p, o};
                    r.text = join_words(r.slots);
                    r.index = index++;
                    corpus.records.push_back(std::move(r));
                }
            }
        }
    }
    return corpus;
}

PromptCorpus filter_concept(const PromptCorpus& corpus, const ConceptSpec& concept_spec) {
    require_word(corpus.words, concept_spec);
    PromptCorpus out{corpus.words, {}};
    std::copy_if(corpus.records.begin(), corpus.records.end(), std::back_inserter(out.records),
                 [&](const PromptRecord& r) { return r.word(concept_spec.slot) == concept_spec.word; });
    return out;
}

PromptCorpus evaluation_set(const PromptCorpus& corpus, const ConceptSpec& concept_spec, std::size_t per_category,
                            std::uint64_t seed) {
    require_word(corpus.words, concept_spec);
    if (per_category == 0) throw ConfigError("per-category sample size must be positive");

    const auto& slot_words = corpus.words[concept_spec.slot];
    std::vector<std::vector<std::size_t>> categories;
    for (const auto& word : slot_words) {
        if (word == concept_spec.word) continue;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < corpus.records.size(); ++i) {
            if (corpus.records[i].word(concept_spec.slot) == word) members.push_back(i);
        }
        if (members.size() < per_category) {
            throw ConfigError("category '" + word + "' has " + std::to_string(members.size()) +
                              " prompts, fewer than the requested " + std::to_string(per_category));
        }
        categories.push_back(std::move(members));
    }

    std::mt19937_64 rng(seed);
    PromptCorpus out{corpus.words, {}};
    out.records.reserve(per_category * categories.size());
    for (auto& members : categories) {
        // Partial Fisher-Yates: the first per_category slots become the sample.
        for (std::size_t i = 0; i < per_category; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(draw_below(rng, members.size() - i));
            std::swap(members[i], members[j]);
        }
        std::sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(per_category));
        for (std::size_t i = 0; i < per_category; ++i) out.records.push_back(corpus.records[members[i]]);
    }
    return out;
}

PromptRecord replaced_prompt(const WordList& words, const PromptRecord& record, const ConceptSpec& concept_spec) {
    require_word(words, concept_spec);
    PromptRecord out = record;
    out.slots[slot_index(concept_spec.slot)] = concept_spec.word;
    out.text = join_words(out.slots);

    std::size_t index = 0;
    for (Slot s : kSlots) {
        const auto idx = words.index_of(s, out.word(s));
        if (!idx) throw ConfigError("record word '" + out.word(s) + "' is not in the " + std::string(slot_name(s)) + " list");
        index = index * words[s].size() + *idx;
    }
    out.index = index;
    return out;
}

std::string render_corpus(const PromptCorpus& corpus) {
    std::string out;
    for (const auto& r : corpus.records) {
        out += r.text;
        out += '\n';
    }
    return out;
}

}  // namespace editioner::prompts
