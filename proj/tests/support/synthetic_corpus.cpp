#include "synthetic_corpus.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "gradrules/corpus.hpp"
#include "gradrules/rng.hpp"

namespace gradrules::testing {

namespace {

struct PlantedClass {
  const char* name;
  const char* anchor;
  std::array<const char*, 4> terms;
};

constexpr std::array<PlantedClass, 4> kClasses{{
    {"sci.crypt", "encryption", {"clipper", "cipher", "nsa", "escrow"}},
    {"sci.electronics", "circuit", {"voltage", "amplifier", "resistor", "solder"}},
    {"sci.med", "patients", {"doctor", "disease", "treatment", "symptoms"}},
    {"sci.space", "orbit", {"nasa", "launch", "shuttle", "lunar"}},
}};

constexpr std::array<const char*, 24> kFiller{
    "article", "number", "group",  "reply",  "idea",   "work",  "world", "time",
    "year",    "line",   "data",   "fact",   "hope",   "money", "paper", "note",
    "book",    "list",   "news",   "story",  "result", "answer", "city", "office"};

void check_vocabulary() {
  for (const auto& c : kClasses) {
    if (is_stopword(c.anchor)) throw std::logic_error("planted anchor is a stopword");
    for (auto t : c.terms) {
      if (is_stopword(t)) throw std::logic_error("planted term is a stopword");
    }
  }
  for (auto f : kFiller) {
    if (is_stopword(f)) throw std::logic_error(std::string("filler word is a stopword: ") + f);
  }
}

}  // namespace

std::string anchor_term(const std::string& class_name) {
  for (const auto& c : kClasses) {
    if (class_name == c.name) return c.anchor;
  }
  throw std::invalid_argument("not a synthetic class: " + class_name);
}

std::vector<std::string> write_synthetic_corpus(const std::filesystem::path& root,
                                                const SyntheticCorpusOptions& options) {
  check_vocabulary();
  Rng rng(options.seed);
  std::vector<std::string> names;
  for (const auto& c : kClasses) {
    names.emplace_back(c.name);
    for (std::size_t d = 0; d < options.docs_per_class; ++d) {
      auto dir = root;
      if (options.train_test_layout) dir /= (d * 10 < options.docs_per_class * 7) ? "train" : "test";
      dir /= c.name;
      std::filesystem::create_directories(dir);

      std::string body;
      const auto word = [&](const char* w) {
        if (!body.empty()) body += (rng.below(8) == 0) ? ".\n" : " ";
        body += w;
      };
      word(c.anchor);
      for (int i = 0; i < 2; ++i) word(c.terms[rng.below(c.terms.size())]);
      for (std::size_t i = 0; i < options.filler_words; ++i) word(kFiller[rng.below(kFiller.size())]);

      char file[32];
      std::snprintf(file, sizeof file, "%05zu", 50000 + d);
      std::ofstream out(dir / file, std::ios::binary);
      out << "From: user" << d << "@example.org\n"
          << "Subject: note " << d << "\n"
          << "Organization: Example\n\n"
          << body << "\n";
      if (d % 3 == 0) out << "> quoted " << kFiller[0] << " from another post\n";
      if (d % 4 == 0) out << "--\nsignature " << kClasses[(&c - kClasses.data() + 1) % kClasses.size()].anchor << "\n";
      if (!out) throw std::runtime_error("cannot write synthetic document");
    }
  }
  return names;
}

}  // namespace gradrules::testing
