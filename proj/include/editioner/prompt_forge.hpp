#pragma once

// Template prompt corpora: every combination of
// <subject> <verb> <preposition> <object>, concept filters over one slot,
// and seeded evaluation samples drawn from the complement categories.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace editioner::prompts {

enum class Slot : std::size_t { subject = 0, verb = 1, preposition = 2, object = 3 };

inline constexpr std::size_t kSlotCount = 4;
inline constexpr std::array<Slot, kSlotCount> kSlots = {Slot::subject, Slot::verb, Slot::preposition, Slot::object};

std::string_view slot_name(Slot slot);
Slot parse_slot(std::string_view name);

class WordList {
public:
    WordList() = default;
    /// Throws ConfigError on an empty slot or a duplicate word within a slot.
    explicit WordList(std::array<std::vector<std::string>, kSlotCount> words);

    /// The stock vocabulary: 9 subjects, 21 verbs, 8 prepositions, 21 objects.
    static WordList defaults();

    const std::vector<std::string>& operator[](Slot slot) const { return words_[static_cast<std::size_t>(slot)]; }
    std::optional<std::size_t> index_of(Slot slot, std::string_view word) const;
    std::size_t combinations() const;

    bool operator==(const WordList&) const = default;

private:
    std::array<std::vector<std::string>, kSlotCount> words_;
};

WordList parse_wordlist(std::string_view json_text);
WordList load_wordlist(const std::filesystem::path& path);
std::string render_wordlist(const WordList& words);

struct ConceptSpec {
    Slot slot = Slot::subject;
    std::string word;

    bool operator==(const ConceptSpec&) const = default;
};

/// Parses "slot=word", e.g. "subject=cat".
ConceptSpec parse_concept(std::string_view text);
std::string to_string(const ConceptSpec& concept_spec);

struct PromptRecord {
    std::string text;
    std::array<std::string, kSlotCount> slots;
    std::size_t index = 0;  // position in the canonical enumeration

    const std::string& word(Slot slot) const { return slots[static_cast<std::size_t>(slot)]; }
    bool operator==(const PromptRecord&) const = default;
};

struct PromptCorpus {
    WordList words;
    std::vector<PromptRecord> records;

    std::size_t size() const { return records.size(); }
};

/// Every combination, ordered lexicographically by (subject, verb, preposition, object) index.
PromptCorpus generate_all(const WordList& words);

/// Records whose `concept_spec.slot` word is `concept_spec.word`, in corpus order.
PromptCorpus filter_concept(const PromptCorpus& corpus, const ConceptSpec& concept_spec);

/// For every other word of the concept slot, `per_category` records drawn
/// uniformly without replacement. Categories follow word-list order; within
/// a category records keep corpus order.
PromptCorpus evaluation_set(const PromptCorpus& corpus, const ConceptSpec& concept_spec, std::size_t per_category,
                            std::uint64_t seed);

/// The record with the concept slot's word swapped for `concept_spec.word`.
PromptRecord replaced_prompt(const WordList& words, const PromptRecord& record, const ConceptSpec& concept_spec);

/// One prompt per line, LF terminated.
std::string render_corpus(const PromptCorpus& corpus);

}  // namespace editioner::prompts
