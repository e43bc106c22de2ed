#pragma once
// Token-set utilities shared by routing, coverage checks and capability fusion.
// Normalization is lowercase alphanumeric runs; everything else is a separator.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>

namespace ziggurat {

inline std::set<std::string> tokenize(std::string_view text) {
    std::set<std::string> out;
    std::string current;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            out.insert(current);
            current.clear();
        }
    }
    if (!current.empty()) out.insert(current);
    return out;
}

// Cosine similarity of two token sets: |A ∩ B| / sqrt(|A| * |B|).
inline double cosine_overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() || b.empty()) return 0.0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    std::size_t hits = 0;
    for (const auto& token : small) {
        if (large.count(token)) ++hits;
    }
    return static_cast<double>(hits) /
           std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

inline const std::set<std::string>& stopwords() {
    static const std::set<std::string> kWords = {
        "a",   "an",  "and", "are",  "as",   "at",   "be",   "by",   "each",
        "for", "from", "in", "into", "is",   "it",   "its",  "of",   "on",
        "or",  "that", "the", "then", "this", "to",   "with",
    };
    return kWords;
}

// Tokens that carry content: tokenize() minus stopwords.
inline std::set<std::string> content_tokens(std::string_view text) {
    std::set<std::string> out = tokenize(text);
    for (const auto& word : stopwords()) out.erase(word);
    return out;
}

namespace detail {

inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace detail
} // namespace ziggurat
