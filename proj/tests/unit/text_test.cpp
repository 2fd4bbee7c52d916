#include <doctest.h>

#include "biorefine/text.hpp"

using namespace biorefine::text;

TEST_CASE("length counts code points") {
  CHECK(length("") == 0);
  CHECK(length("abc") == 3);
  CHECK(length("TNF-α") == 5);
  CHECK(length("naïve café") == 10);
  CHECK(length("\xF0\x9F\x98\x80") == 1);  // 4-byte sequence
}

TEST_CASE("malformed utf-8 is rejected") {
  CHECK_THROWS_AS(decode("\xC3"), Utf8Error);            // truncated
  CHECK_THROWS_AS(decode("\xC0\xAF"), Utf8Error);        // overlong '/'
  CHECK_THROWS_AS(decode("\xED\xA0\x80"), Utf8Error);    // surrogate
  CHECK_THROWS_AS(decode("\xE2\x82"), Utf8Error);
  CHECK_THROWS_AS(decode("\x80"), Utf8Error);
}

TEST_CASE("decode/encode round trip") {
  const std::string s = "Über β-cell ω-3 \xF0\x9F\x98\x80";
  CHECK(encode(decode(s)) == s);
}

TEST_CASE("case folding beyond ascii") {
  CHECK(to_lower("TNF-Α") == "tnf-α");
  CHECK(to_lower("ÜBER") == "über");
  CHECK(to_lower("IL-6") == "il-6");
  CHECK(to_upper(U'α') == U'Α');
  CHECK(is_upper(U'Ж'));
  CHECK(is_lower(U'ж'));
  CHECK_FALSE(is_upper(U'6'));
}

TEST_CASE("trim strips unicode whitespace") {
  CHECK(trim("  IL-6\t\n") == "IL-6");
  CHECK(trim("\xC2\xA0" "x\xC2\xA0") == "x");  // no-break space
  CHECK(trim("   ").empty());
}

TEST_CASE("IndexedText slices by code point") {
  const IndexedText t("Gut α-flora");
  CHECK(t.size() == 11);
  CHECK(t.slice(4, 11) == "α-flora");
  CHECK(t.slice(4, 5) == "α");
  CHECK(t.slice(3, 3).empty());
  CHECK_THROWS_AS((void)t.slice(5, 12), std::out_of_range);
  CHECK_THROWS_AS((void)t.slice(6, 5), std::out_of_range);
}
