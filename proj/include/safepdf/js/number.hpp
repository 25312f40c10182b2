// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace safepdf::js {

// ECMAScript Number::toString (radix 10).
std::string number_to_string(double value);
std::u16string number_to_u16string(double value);

// ToNumber applied to a String value (StringNumericLiteral grammar).
double string_to_number(std::u16string_view text);

bool is_js_whitespace(char16_t c);
bool is_js_line_terminator(char16_t c);

// ToInt32 / ToUint32.
int32_t to_int32(double value);
uint32_t to_uint32(double value);

}
