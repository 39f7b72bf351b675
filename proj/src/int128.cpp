#include "sparseconv/int128.hpp"

#include <algorithm>

namespace sparseconv {

std::string to_string_i128(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  u128 x = neg ? u128(0) - u128(v) : u128(v);
  std::string s;
  while (x > 0) {
    s.push_back(char('0' + int(x % 10)));
    x /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

}  // namespace sparseconv
