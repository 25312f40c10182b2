// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace safepdf::domain {

inline constexpr size_t default_k = 8;
inline constexpr uint64_t unbounded_length = std::numeric_limits<uint64_t>::max();

// A string is a number-string iff ToNumber(s) is not NaN, or s is "NaN".
bool is_number_string(std::u16string_view s);

class AbsString {
public:
    enum class Kind : uint8_t { Bottom, Set, NumberStr, NotNumberStr, Top };

    AbsString() = default;
    static AbsString bottom() { return {}; }
    static AbsString constant(std::u16string s);
    // Collapses to the category of `values` when there are more than k.
    static AbsString of(std::set<std::u16string> values, size_t k = default_k);
    // Non-set kinds. `length_bound` is the longest string the analyzed code
    // may have built into this value (external inputs contribute 0).
    static AbsString category(Kind kind, uint64_t length_bound = 0);
    static AbsString top(uint64_t length_bound = 0) { return category(Kind::Top, length_bound); }
    static AbsString number_str(uint64_t length_bound = 0) { return category(Kind::NumberStr, length_bound); }
    static AbsString not_number_str(uint64_t length_bound = 0) { return category(Kind::NotNumberStr, length_bound); }

    Kind kind() const { return kind_; }
    bool is_bottom() const { return kind_ == Kind::Bottom; }
    bool is_top() const { return kind_ == Kind::Top; }
    bool is_set() const { return kind_ == Kind::Set; }
    std::set<std::u16string> const& values() const { return values_; }
    std::optional<std::u16string> single() const;
    uint64_t length_bound() const { return length_bound_; }

    // Concrete membership in the concretization.
    bool contains(std::u16string_view s) const;
    // Whether every member is a number-string (true for Bottom).
    bool all_number_strings() const;
    bool no_number_strings() const;

    bool leq(AbsString const& other) const;
    AbsString join(AbsString const& other, size_t k = default_k) const;
    AbsString widen(AbsString const& next, size_t k = default_k) const;
    // Keeps the kind; raises the length annotation.
    AbsString with_length_bound(uint64_t bound) const;

    bool operator==(AbsString const&) const = default;

private:
    Kind kind_ = Kind::Bottom;
    std::set<std::u16string> values_;
    uint64_t length_bound_ = 0;
};

// Total order on doubles: numeric, -0 before +0, NaN last.
struct NumberLess {
    bool operator()(double a, double b) const;
};

class AbsNumber {
public:
    enum class Kind : uint8_t { Bottom, Set, Top };

    AbsNumber() = default;
    static AbsNumber bottom() { return {}; }
    static AbsNumber constant(double v);
    static AbsNumber of(std::set<double, NumberLess> values, size_t k = default_k);
    static AbsNumber top();

    Kind kind() const { return kind_; }
    bool is_bottom() const { return kind_ == Kind::Bottom; }
    bool is_top() const { return kind_ == Kind::Top; }
    bool is_set() const { return kind_ == Kind::Set; }
    std::set<double, NumberLess> const& values() const { return values_; }
    std::optional<double> single() const;

    bool contains(double v) const;
    bool leq(AbsNumber const& other) const;
    AbsNumber join(AbsNumber const& other, size_t k = default_k) const;
    AbsNumber widen(AbsNumber const& next, size_t k = default_k) const;

    bool operator==(AbsNumber const& other) const;

private:
    Kind kind_ = Kind::Bottom;
    std::set<double, NumberLess> values_;
};

class AbsBool {
public:
    AbsBool() = default;
    static AbsBool bottom() { return {}; }
    static AbsBool constant(bool v) { return AbsBool(v ? 1 : 2); }
    static AbsBool top() { return AbsBool(3); }

    bool is_bottom() const { return bits_ == 0; }
    bool is_top() const { return bits_ == 3; }
    bool may_true() const { return bits_ & 1; }
    bool may_false() const { return bits_ & 2; }
    std::optional<bool> single() const;

    bool contains(bool v) const { return v ? may_true() : may_false(); }
    bool leq(AbsBool other) const { return (bits_ & ~other.bits_) == 0; }
    AbsBool join(AbsBool other) const { return AbsBool(bits_ | other.bits_); }
    AbsBool meet(AbsBool other) const { return AbsBool(bits_ & other.bits_); }

    bool operator==(AbsBool const&) const = default;

private:
    explicit AbsBool(uint8_t bits) : bits_(bits) { }
    uint8_t bits_ = 0;
};

// Program: objects allocated by literals and `new`. Scope: activation
// records (site = function site or catch id). Proto: the prototype object
// created with a function. Args: `arguments` objects. Native: objects
// built by model functions (site = call id).
enum class AddressSpace : uint8_t { Program, Model, Scope, Proto, Args, Native };

// Allocation site plus one level of calling context (0 = top level).
struct Address {
    AddressSpace space = AddressSpace::Program;
    uint32_t site = 0;
    uint32_t context = 0;

    static Address program(uint32_t site, uint32_t context = 0) { return { AddressSpace::Program, site, context }; }
    static Address model(uint32_t id) { return { AddressSpace::Model, id, 0 }; }
    static Address of(AddressSpace space, uint32_t site, uint32_t context = 0) { return { space, site, context }; }

    auto operator<=>(Address const&) const = default;
};

using AddressNamer = std::function<std::string(Address)>;
std::string render_address(Address a, AddressNamer const* namer = nullptr);

struct AbsValue {
    AbsString str;
    AbsNumber num;
    AbsBool boolean;
    bool undef = false;
    bool null = false;
    std::set<Address> addrs;

    static AbsValue bottom() { return {}; }
    static AbsValue undefined();
    static AbsValue null_value();
    static AbsValue string(AbsString s);
    static AbsValue string(std::u16string s) { return string(AbsString::constant(std::move(s))); }
    static AbsValue number(AbsNumber n);
    static AbsValue number(double v) { return number(AbsNumber::constant(v)); }
    static AbsValue boolean_value(AbsBool b);
    static AbsValue boolean_value(bool b) { return boolean_value(AbsBool::constant(b)); }
    static AbsValue address(Address a);
    // Any primitive value.
    static AbsValue top_primitive();

    bool is_bottom() const;
    bool leq(AbsValue const& other) const;
    AbsValue join(AbsValue const& other, size_t k = default_k) const;
    AbsValue widen(AbsValue const& next, size_t k = default_k) const;
    // Only the primitive components / only the addresses.
    bool has_primitive() const;
    bool only_addresses() const { return !has_primitive() && !addrs.empty(); }

    bool operator==(AbsValue const&) const = default;
};

// ES5 coercions lifted to abstract values; addresses coerce to the top of
// the target domain.
AbsNumber to_number(AbsValue const& v, size_t k = default_k);
AbsString to_string(AbsValue const& v, size_t k = default_k);
AbsBool to_boolean(AbsValue const& v);
AbsString to_string(AbsNumber const& n, size_t k = default_k);
AbsNumber to_number(AbsString const& s, size_t k = default_k);

// Canonical text, e.g. `"a"|"b"∪⊤Num∪undef`.
std::string render(AbsValue const& v, AddressNamer const* namer = nullptr);
std::string render(AbsString const& s);
std::string render(AbsNumber const& n);
// Parses the canonical text (addresses excluded) plus the ASCII aliases
// TopStr, TopNum, TopBool and `string:⊤`-style forms.
std::optional<AbsValue> parse_value(std::string_view text, size_t k = default_k);

}
