#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace termforge {

// Shortest decimal text that parses back to the same double; "inf", "-inf"
// and "nan" for non-finite values.
std::string format_real(double v);

// Strict parse of a whole token; accepts the spellings format_real emits.
// Throws Error on trailing garbage.
double parse_real(std::string_view s);

// CSV field, quoted only when it holds a comma, quote or newline.
std::string csv_field(std::string_view s);
// Splits one CSV record, undoing csv_field quoting.
std::vector<std::string> split_csv(std::string_view line);

}  // namespace termforge
