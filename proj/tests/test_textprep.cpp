#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixrec/resources.hpp"
#include "fixrec/textprep.hpp"

using namespace fixrec;

TEST_CASE("tokenize lowercases and splits on non-word bytes") {
  CHECK(textprep::tokenize("kernel: unable to handle (0x42)") ==
        std::vector<std::string>{"kernel", "unable", "to", "handle", "0x42"});
  CHECK(textprep::tokenize("NULL Pointer,Dereference") ==
        std::vector<std::string>{"null", "pointer", "dereference"});
}

TEST_CASE("tokenize drops short and purely numeric tokens") {
  CHECK(textprep::tokenize("a 1 42 0x42 x y12") == std::vector<std::string>{"0x42", "y12"});
  CHECK(textprep::tokenize("ipv6 eth0 99 q") == std::vector<std::string>{"ipv6", "eth0"});
  CHECK(textprep::tokenize("").empty());
  CHECK(textprep::tokenize("  \t\n ").empty());
}

TEST_CASE("tokenize treats non-ASCII bytes as split points") {
  CHECK(textprep::tokenize("caf\xc3\xa9 crash") == std::vector<std::string>{"caf", "crash"});
}

TEST_CASE("stopword removal preserves order and is idempotent") {
  const textprep::TokenSeq in{"the", "kernel", "is", "unable", "to", "handle", "this"};
  const textprep::TokenSeq expect{"kernel", "unable", "handle"};
  CHECK(textprep::remove_stopwords(in) == expect);
  CHECK(textprep::remove_stopwords(expect) == expect);
  CHECK(textprep::remove_stopwords({}).empty());
}

TEST_CASE("embedded stopword list matches the shipped data file") {
  std::ifstream f(std::string(FIXREC_DATA_DIR) + "/stopwords_en.txt");
  REQUIRE(f.is_open());
  std::vector<std::string> from_file;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) from_file.push_back(line);
  }
  const auto embedded = resources::english_stopwords();
  REQUIRE(from_file.size() == embedded.size());
  for (std::size_t i = 0; i < from_file.size(); ++i) CHECK(from_file[i] == embedded[i]);
  CHECK(embedded.size() == 127);
}

TEST_CASE("porter stemmer: 100-word vector frozen from a reference implementation") {
  // Pairs produced by an independent reference implementation of the
  // canonical Porter algorithm; frozen here as the oracle.
  const std::vector<std::pair<std::string, std::string>> oracle = {
      {"checking", "check"},
      {"checked", "check"},
      {"checks", "check"},
      {"caresses", "caress"},
      {"ponies", "poni"},
      {"ties", "ti"},
      {"caress", "caress"},
      {"cats", "cat"},
      {"feed", "feed"},
      {"agreed", "agre"},
      {"plastered", "plaster"},
      {"bled", "bled"},
      {"motoring", "motor"},
      {"sing", "sing"},
      {"conflated", "conflat"},
      {"troubled", "troubl"},
      {"sized", "size"},
      {"hopping", "hop"},
      {"tanned", "tan"},
      {"falling", "fall"},
      {"hissing", "hiss"},
      {"fizzed", "fizz"},
      {"failing", "fail"},
      {"filing", "file"},
      {"happy", "happi"},
      {"sky", "sky"},
      {"relational", "relat"},
      {"conditional", "condit"},
      {"rational", "ration"},
      {"valenci", "valenc"},
      {"hesitanci", "hesit"},
      {"digitizer", "digit"},
      {"conformabli", "conform"},
      {"radicalli", "radic"},
      {"differentli", "differ"},
      {"vileli", "vile"},
      {"analogousli", "analog"},
      {"vietnamization", "vietnam"},
      {"predication", "predic"},
      {"operator", "oper"},
      {"feudalism", "feudal"},
      {"decisiveness", "decis"},
      {"hopefulness", "hope"},
      {"callousness", "callous"},
      {"formaliti", "formal"},
      {"sensitiviti", "sensit"},
      {"sensibiliti", "sensibl"},
      {"triplicate", "triplic"},
      {"formative", "form"},
      {"formalize", "formal"},
      {"electriciti", "electr"},
      {"electrical", "electr"},
      {"hopeful", "hope"},
      {"goodness", "good"},
      {"revival", "reviv"},
      {"allowance", "allow"},
      {"inference", "infer"},
      {"airliner", "airlin"},
      {"gyroscopic", "gyroscop"},
      {"adjustable", "adjust"},
      {"defensible", "defens"},
      {"irritant", "irrit"},
      {"replacement", "replac"},
      {"adjustment", "adjust"},
      {"dependent", "depend"},
      {"adoption", "adopt"},
      {"homologou", "homolog"},
      {"communism", "commun"},
      {"activate", "activ"},
      {"angulariti", "angular"},
      {"homologous", "homolog"},
      {"effective", "effect"},
      {"bowdlerize", "bowdler"},
      {"probate", "probat"},
      {"cease", "ceas"},
      {"controll", "control"},
      {"allocation", "alloc"},
      {"allocated", "alloc"},
      {"scheduler", "schedul"},
      {"scheduling", "schedul"},
      {"pointer", "pointer"},
      {"pointers", "pointer"},
      {"dereference", "derefer"},
      {"initialization", "initi"},
      {"initialized", "initi"},
      {"overflow", "overflow"},
      {"overflowed", "overflow"},
      {"panic", "panic"},
      {"panics", "panic"},
      {"deadlock", "deadlock"},
      {"deadlocks", "deadlock"},
      {"corruption", "corrupt"},
      {"corrupted", "corrupt"},
      {"mutex", "mutex"},
      {"mutexes", "mutex"},
      {"regression", "regress"},
      {"regressions", "regress"},
      {"unable", "unabl"},
      {"paging", "page"},
      {"kernel", "kernel"},
  };
  REQUIRE(oracle.size() == 100);
  int mismatches = 0;
  for (const auto& [word, stem] : oracle) {
    if (textprep::porter_stem(word) != stem) {
      ++mismatches;
      CAPTURE(word);
      CHECK(textprep::porter_stem(word) == stem);
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("porter stemmer leaves words shorter than three characters alone") {
  CHECK(textprep::porter_stem("a") == "a");
  CHECK(textprep::porter_stem("is") == "is");
  CHECK(textprep::porter_stem("oo") == "oo");
}

TEST_CASE("preprocess pipeline on the canonical panic summary") {
  corpus::BugReport r;
  r.id = "1";
  r.short_desc = "kernel unable to handle paging request";
  CHECK(textprep::preprocess(r) ==
        textprep::TokenSeq{"kernel", "unabl", "handl", "page", "request"});
}

TEST_CASE("preprocess uses short_desc only and tolerates stopword-only text") {
  corpus::BugReport r;
  r.id = "2";
  r.short_desc = "it is the";
  r.long_desc = "kernel panic everywhere";
  CHECK(textprep::preprocess(r).empty());
}

TEST_CASE("preprocess_all is bit-identical across execution modes") {
  std::vector<corpus::BugReport> reports(64);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    reports[i].id = std::to_string(i);
    reports[i].short_desc = "the scheduler " + std::to_string(i) +
                            " was unable to handle paging requests while checking pointers";
  }
  const auto serial = textprep::preprocess_all(reports, par::Exec::serial);
  const auto parallel = textprep::preprocess_all(reports, par::Exec::parallel);
  CHECK(serial == parallel);
  CHECK(serial.size() == reports.size());
}
