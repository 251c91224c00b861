// SPDX-License-Identifier: Apache-2.0
#include "s2t/texteval/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uvernum.h>

#include <cctype>
#include <cmath>
#include <numeric>

#include "s2t/error.hpp"

namespace s2t {

Tokens normalize_text(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) throw DataError(std::string("ICU NFD unavailable: ") + u_errorName(status));

  icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s.toLower(icu::Locale::getRoot());
  icu::UnicodeString decomposed = nfd->normalize(s, status);
  if (U_FAILURE(status)) throw DataError(std::string("ICU normalization failed: ") + u_errorName(status));

  icu::UnicodeString cleaned;
  for (int32_t i = 0; i < decomposed.length();) {
    const UChar32 c = decomposed.char32At(i);
    i += U16_LENGTH(c);
    if (U_GET_GC_MASK(c) & U_GC_M_MASK) continue;
    cleaned.append(u_isalnum(c) ? u_tolower(c) : UChar32{' '});
  }
  std::string utf8;
  cleaned.toUTF8String(utf8);

  Tokens out;
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    const std::size_t start = utf8.find_first_not_of(' ', pos);
    if (start == std::string::npos) break;
    const std::size_t end = utf8.find(' ', start);
    out.push_back(utf8.substr(start, end - start));
    pos = end;
  }
  return out;
}

std::string join(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::size_t edit_distance(const Tokens& ref, const Tokens& hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

double wer(const Tokens& ref, const Tokens& hyp) {
  if (ref.empty()) throw DataError("wer: empty reference");
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t\r\n");
    if (b != std::string::npos) {
      const auto e = cur.find_last_not_of(" \t\r\n");
      out.push_back(cur.substr(b, e - b + 1));
    }
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '\n') {
      flush();
      continue;
    }
    cur += ch;
    const bool end_mark = ch == '.' || ch == '!' || ch == '?';
    if (end_mark && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) flush();
  }
  flush();
  return out;
}

MeanCi mean_ci(const std::vector<double>& values) {
  MeanCi r;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.half_width = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return r;
}

std::string unicode_library_version() { return std::string("ICU ") + U_ICU_VERSION; }

}  // namespace s2t
