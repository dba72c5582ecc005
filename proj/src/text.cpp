#include "cami/text.hpp"

#include <algorithm>
#include <cctype>

namespace cami {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

bool boundary_ok(const std::string& text, size_t pos, size_t len) {
    if (pos > 0 && is_word_char(text[pos - 1]) && is_word_char(text[pos])) return false;
    size_t end = pos + len;
    if (end < text.size() && is_word_char(text[end]) && is_word_char(text[end - 1])) {
        return false;
    }
    return true;
}

}  // namespace

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    size_t a = 0;
    size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool contains_word_ci(const std::string& text, const std::string& phrase) {
    return find_last_word_ci(text, phrase).has_value();
}

std::optional<size_t> find_last_word_ci(const std::string& text, const std::string& phrase) {
    if (phrase.empty()) return std::nullopt;
    const std::string haystack = to_lower(text);
    const std::string needle = to_lower(phrase);
    std::optional<size_t> best;
    size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        if (boundary_ok(text, pos, needle.size())) best = pos;
        ++pos;
    }
    return best;
}

std::string strip_speaker_prefix(const std::string& text) {
    std::string t = trim(text);
    for (const char* label : {"Counselor:", "Client:"}) {
        const size_t len = std::string(label).size();
        if (t.size() > len && to_lower(t.substr(0, len)) == to_lower(label)) {
            return trim(t.substr(len));
        }
    }
    return t;
}

std::optional<std::string> extract_json_object(const std::string& text) {
    size_t start = text.find('{');
    if (start == std::string::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            if (--depth == 0) return text.substr(start, i - start + 1);
        }
    }
    return std::nullopt;
}

std::optional<bool> parse_final_yes_no(const std::string& text) {
    auto yes = find_last_word_ci(text, "yes");
    auto no = find_last_word_ci(text, "no");
    if (!yes && !no) return std::nullopt;
    if (yes && no) return *yes > *no;
    return yes.has_value();
}

std::vector<NameMatch> match_names_in_text(const std::string& text,
                                           const std::vector<std::string>& names) {
    const std::string haystack = to_lower(text);
    std::vector<NameMatch> raw;
    for (size_t i = 0; i < names.size(); ++i) {
        const std::string needle = to_lower(names[i]);
        if (needle.empty()) continue;
        size_t pos = 0;
        while ((pos = haystack.find(needle, pos)) != std::string::npos) {
            if (boundary_ok(text, pos, needle.size())) {
                raw.push_back({i, pos, needle.size()});
            }
            ++pos;
        }
    }
    // Longest match wins at a shared start; later we drop anything overlapping
    // an accepted span.
    std::sort(raw.begin(), raw.end(), [](const NameMatch& a, const NameMatch& b) {
        if (a.position != b.position) return a.position < b.position;
        return a.length > b.length;
    });
    std::vector<NameMatch> out;
    size_t covered_end = 0;
    for (const auto& m : raw) {
        if (m.position < covered_end) continue;
        out.push_back(m);
        covered_end = m.position + m.length;
    }
    return out;
}

std::optional<size_t> last_name_in_text(const std::string& text,
                                        const std::vector<std::string>& names) {
    auto matches = match_names_in_text(text, names);
    if (matches.empty()) return std::nullopt;
    return matches.back().name_index;
}

std::vector<std::string> parse_list_items(const std::string& text) {
    std::vector<std::string> items;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string line = trim(text.substr(pos, eol == std::string::npos ? eol : eol - pos));
        if (!line.empty()) {
            if (line[0] == '-' || line[0] == '*') {
                std::string item = trim(line.substr(1));
                if (!item.empty()) items.push_back(item);
            } else if (std::isdigit(static_cast<unsigned char>(line[0]))) {
                size_t i = 0;
                while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
                if (i < line.size() && (line[i] == '.' || line[i] == ')')) {
                    std::string item = trim(line.substr(i + 1));
                    if (!item.empty()) items.push_back(item);
                }
            }
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    return items;
}

std::string render_guidance_text(const std::string& guidance, const std::string& behavior,
                                 const std::string& goal) {
    std::string out = guidance;
    for (const auto& [token, value] :
         {std::pair<std::string, const std::string&>{"[problematic behavior]", behavior},
          std::pair<std::string, const std::string&>{"[goal]", goal}}) {
        size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return out;
}

}  // namespace cami
