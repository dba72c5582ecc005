#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cami {

std::string to_lower(std::string s);
std::string trim(const std::string& s);

/// Case-insensitive phrase search requiring word boundaries (non-alphanumeric
/// or string edge on both sides), so "Contemplation" never matches inside
/// "Precontemplation".
bool contains_word_ci(const std::string& text, const std::string& phrase);
std::optional<size_t> find_last_word_ci(const std::string& text, const std::string& phrase);

/// Removes a leading "Counselor:" / "Client:" speaker label, if present.
std::string strip_speaker_prefix(const std::string& text);

/// Extracts the first balanced {...} object from free text.
std::optional<std::string> extract_json_object(const std::string& text);

/// Final standalone Yes/No in the text; nullopt when neither appears.
std::optional<bool> parse_final_yes_no(const std::string& text);

struct NameMatch {
    size_t name_index = 0;
    size_t position = 0;
    size_t length = 0;
};

/// All non-overlapping occurrences of the given names in the text, ordered by
/// position, preferring the longest name where matches start together.
std::vector<NameMatch> match_names_in_text(const std::string& text,
                                           const std::vector<std::string>& names);

/// Index of the name whose occurrence appears last, if any.
std::optional<size_t> last_name_in_text(const std::string& text,
                                        const std::vector<std::string>& names);

/// Parses "- item" / "1. item" style list lines.
std::vector<std::string> parse_list_items(const std::string& text);

/// Replaces the [problematic behavior] and [goal] tokens used by topic
/// guidance texts.
std::string render_guidance_text(const std::string& guidance, const std::string& behavior,
                                 const std::string& goal);

}  // namespace cami
