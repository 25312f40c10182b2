// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/domain/values.hpp"

#include <functional>
#include <variant>

namespace safepdf::domain {

// Whether `s` could start (end) some number-string; false proves that any
// concatenation with `s` in front (at the end) is not a number-string.
bool may_prefix_number(std::u16string_view s);
bool may_suffix_number(std::u16string_view s);

// Abstract concatenation. Concrete results longer than `cap` code units
// are not kept; the result becomes a category whose length bound records
// the real length.
AbsString concat(AbsString const& a, AbsString const& b, size_t k = default_k, uint64_t cap = 65536);

uint64_t saturating_add(uint64_t a, uint64_t b);
uint64_t saturating_mul(uint64_t a, uint64_t b);

// Possible `length` values.
AbsNumber string_lengths(AbsString const& s, size_t k = default_k);

// Pointwise lifts. A Top operand gives Top.
AbsNumber map_number(AbsNumber const& a, std::function<double(double)> const& f, size_t k = default_k);
AbsNumber map_numbers(AbsNumber const& a, AbsNumber const& b, std::function<double(double, double)> const& f,
                      size_t k = default_k);

// Applies `f` to every member of a set; categories map to `fallback`.
AbsString map_string(AbsString const& s, std::function<std::u16string(std::u16string const&)> const& f,
                     AbsString const& fallback, size_t k = default_k, uint64_t cap = 65536);

// The strings in `s` other than `value` (identity for categories).
AbsString remove_string(AbsString const& s, std::u16string_view value);
AbsNumber remove_number(AbsNumber const& n, double value);
AbsString filter_strings(AbsString const& s, std::function<bool(std::u16string const&)> const& keep);
AbsNumber filter_numbers(AbsNumber const& n, std::function<bool(double)> const& keep);

// ES5 `==` / `===` on two primitives.
using Primitive = std::variant<std::monostate, std::nullptr_t, bool, double, std::u16string>;
bool strict_equals(Primitive const& a, Primitive const& b);
bool loose_equals(Primitive const& a, Primitive const& b);

}
