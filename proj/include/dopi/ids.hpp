#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

namespace dopi {

// String token tagged with the kind of node it names. Ordering is
// lexicographic on the underlying text and is the global tie-break.
template <typename Tag>
class Token {
public:
    Token() = default;
    explicit Token(std::string value) : value_(std::move(value)) {}
    explicit Token(std::string_view value) : value_(value) {}
    explicit Token(const char* value) : value_(value) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const Token&, const Token&) = default;
    friend bool operator==(const Token&, const Token&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Token& t) { return os << t.value_; }

private:
    std::string value_;
};

struct SymptomTag {};
struct DiseaseTag {};

using SymptomId = Token<SymptomTag>;
using DiseaseId = Token<DiseaseTag>;

} // namespace dopi

template <typename Tag>
struct std::hash<dopi::Token<Tag>> {
    std::size_t operator()(const dopi::Token<Tag>& t) const noexcept {
        return std::hash<std::string>{}(t.str());
    }
};
