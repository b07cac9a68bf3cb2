// Porter stemming algorithm, original 1980 rule set. Operates on lowercase
// ASCII words; words of length <= 2 are returned unchanged.

#include <cstddef>
#include <string>

namespace lstmabc::corpus {

namespace {

bool isVowelAt(const std::string& w, std::size_t i) {
  const char c = w[i];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
  // y counts as a vowel when preceded by a consonant
  if (c == 'y') return i > 0 && !isVowelAt(w, i - 1);
  return false;
}

// Measure m of the word prefix w[0..len): number of VC transitions in the
// [C](VC)^m[V] decomposition.
int measure(const std::string& w, std::size_t len) {
  int m = 0;
  std::size_t i = 0;
  while (i < len && !isVowelAt(w, i)) ++i;
  while (i < len) {
    while (i < len && isVowelAt(w, i)) ++i;
    if (i >= len) break;
    ++m;
    while (i < len && !isVowelAt(w, i)) ++i;
  }
  return m;
}

bool containsVowel(const std::string& w, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i)
    if (isVowelAt(w, i)) return true;
  return false;
}

bool endsDoubleConsonant(const std::string& w) {
  const std::size_t n = w.size();
  if (n < 2) return false;
  return w[n - 1] == w[n - 2] && !isVowelAt(w, n - 1);
}

// *o condition: stem ends consonant-vowel-consonant and the final consonant
// is not w, x or y.
bool endsCvc(const std::string& w, std::size_t len) {
  if (len < 3) return false;
  if (isVowelAt(w, len - 3) || !isVowelAt(w, len - 2) || isVowelAt(w, len - 1)) return false;
  const char c = w[len - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool endsWith(const std::string& w, const char* suffix) {
  const std::size_t n = w.size();
  std::size_t sl = 0;
  while (suffix[sl] != '\0') ++sl;
  if (sl > n) return false;
  return w.compare(n - sl, sl, suffix) == 0;
}

// Replace `suffix` by `repl` when the remaining stem has measure > minM.
bool replaceIfMeasure(std::string& w, const char* suffix, const char* repl, int minM) {
  if (!endsWith(w, suffix)) return false;
  std::size_t sl = 0;
  while (suffix[sl] != '\0') ++sl;
  const std::size_t stemLen = w.size() - sl;
  if (measure(w, stemLen) > minM) w = w.substr(0, stemLen) + repl;
  return true;  // suffix matched; stop scanning this step either way
}

void step1a(std::string& w) {
  if (endsWith(w, "sses")) {
    w.erase(w.size() - 2);
  } else if (endsWith(w, "ies")) {
    w.erase(w.size() - 2);
  } else if (endsWith(w, "ss")) {
    // unchanged
  } else if (endsWith(w, "s")) {
    w.erase(w.size() - 1);
  }
}

void step1b(std::string& w) {
  if (endsWith(w, "eed")) {
    if (measure(w, w.size() - 3) > 0) w.erase(w.size() - 1);
    return;
  }
  bool stripped = false;
  if (endsWith(w, "ed") && containsVowel(w, w.size() - 2)) {
    w.erase(w.size() - 2);
    stripped = true;
  } else if (endsWith(w, "ing") && containsVowel(w, w.size() - 3)) {
    w.erase(w.size() - 3);
    stripped = true;
  }
  if (!stripped) return;
  if (endsWith(w, "at") || endsWith(w, "bl") || endsWith(w, "iz")) {
    w += 'e';
  } else if (endsDoubleConsonant(w)) {
    const char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.erase(w.size() - 1);
  } else if (measure(w, w.size()) == 1 && endsCvc(w, w.size())) {
    w += 'e';
  }
}

void step1c(std::string& w) {
  if (endsWith(w, "y") && containsVowel(w, w.size() - 1)) w.back() = 'i';
}

void step2(std::string& w) {
  static const struct { const char* from; const char* to; } rules[] = {
      {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},  {"anci", "ance"},
      {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},    {"entli", "ent"},
      {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
      {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
      {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},  {"biliti", "ble"},
  };
  // longest matching suffix wins
  const char* bestFrom = nullptr;
  const char* bestTo = nullptr;
  std::size_t bestLen = 0;
  for (const auto& r : rules) {
    std::size_t sl = std::string(r.from).size();
    if (sl > bestLen && endsWith(w, r.from)) {
      bestFrom = r.from;
      bestTo = r.to;
      bestLen = sl;
    }
  }
  if (bestFrom) replaceIfMeasure(w, bestFrom, bestTo, 0);
}

void step3(std::string& w) {
  static const struct { const char* from; const char* to; } rules[] = {
      {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
      {"ical", "ic"},  {"ful", ""},   {"ness", ""},
  };
  const char* bestFrom = nullptr;
  const char* bestTo = nullptr;
  std::size_t bestLen = 0;
  for (const auto& r : rules) {
    std::size_t sl = std::string(r.from).size();
    if (sl > bestLen && endsWith(w, r.from)) {
      bestFrom = r.from;
      bestTo = r.to;
      bestLen = sl;
    }
  }
  if (bestFrom) replaceIfMeasure(w, bestFrom, bestTo, 0);
}

void step4(std::string& w) {
  static const char* suffixes[] = {"ement", "ance", "ence", "able", "ible", "ment",
                                   "ent",  "ion",  "ism",  "ate",  "iti",  "ous",
                                   "ive",  "ize",  "al",   "er",   "ic",   "ant",
                                   "ou"};
  const char* best = nullptr;
  std::size_t bestLen = 0;
  for (const char* s : suffixes) {
    std::size_t sl = std::string(s).size();
    if (sl > bestLen && endsWith(w, s)) {
      best = s;
      bestLen = sl;
    }
  }
  if (!best) return;
  const std::size_t stemLen = w.size() - bestLen;
  if (measure(w, stemLen) <= 1) return;
  if (std::string(best) == "ion") {
    if (stemLen == 0) return;
    const char c = w[stemLen - 1];
    if (c != 's' && c != 't') return;
  }
  w.erase(stemLen);
}

void step5a(std::string& w) {
  if (!endsWith(w, "e")) return;
  const std::size_t stemLen = w.size() - 1;
  const int m = measure(w, stemLen);
  if (m > 1 || (m == 1 && !endsCvc(w, stemLen))) w.erase(stemLen);
}

void step5b(std::string& w) {
  if (measure(w, w.size()) > 1 && endsDoubleConsonant(w) && w.back() == 'l')
    w.erase(w.size() - 1);
}

}  // namespace

std::string porterStem(std::string w) {
  if (w.size() <= 2) return w;
  step1a(w);
  step1b(w);
  step1c(w);
  step2(w);
  step3(w);
  step4(w);
  step5a(w);
  step5b(w);
  return w;
}

}  // namespace lstmabc::corpus
