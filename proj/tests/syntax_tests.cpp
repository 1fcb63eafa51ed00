#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dehum/error.hpp"
#include "dehum/syntax.hpp"
#include "support/test_paths.hpp"

using namespace dehum;
using namespace dehum::testing;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto dir = std::filesystem::temp_directory_path() / "dehum_tests";
    std::filesystem::create_directories(dir);
    auto path = dir / name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::map<std::string, ParsedSentence> by_sent_id(const std::vector<ParsedSentence>& sentences) {
    std::map<std::string, ParsedSentence> out;
    for (const auto& s : sentences) out[s.sent_id] = s;
    return out;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("conllu reader keeps structure and skips range lines") {
    auto sentences = read_conllu(fixture_dir() / "parses.conllu");
    CHECK(sentences.size() == 70);

    for (const auto& s : sentences) {
        CHECK_FALSE(s.sent_id.empty());
        int roots = 0;
        for (const auto& t : s.tokens) {
            if (t.head == 0) ++roots;
            CHECK(t.head >= 0);
            CHECK(t.head <= static_cast<int>(s.tokens.size()));
        }
        CHECK(roots == 1);
    }

    auto map = by_sent_id(sentences);
    // the 3-4 range line is dropped but its parts survive
    const auto& ranged = map.at("s2000_05");
    REQUIRE(ranged.tokens.size() == 5);
    CHECK(ranged.tokens[2].form == "did");
    CHECK(ranged.tokens[3].form == "not");

    // inline paragraph comments are honored, others wait for the map
    CHECK(map.at("s2000_00").paragraph_id == "p0001");
    CHECK(map.at("s2000_01").paragraph_id == "");
}

TEST_CASE("sentence map fills the missing paragraph ids") {
    auto sentences = read_conllu(fixture_dir() / "parses.conllu");
    auto map = load_sentence_map(fixture_dir() / "sentence_map.tsv");
    CHECK(map.at("s2000_01") == "p0002");
    apply_sentence_map(sentences, map);
    auto idx = by_sent_id(sentences);
    CHECK(idx.at("s2000_01").paragraph_id == "p0002");
    CHECK(idx.at("s2000_00").paragraph_id == "p0001"); // inline id survives
    for (const auto& s : sentences) CHECK_FALSE(s.paragraph_id.empty());
}

TEST_CASE("svo extraction handles the fixture constructions") {
    auto sentences = read_conllu(fixture_dir() / "parses.conllu");
    auto idx = by_sent_id(sentences);

    SUBCASE("plain transitive clause") {
        auto svo = extract_svo(idx.at("s2000_00"));
        REQUIRE(svo.size() == 1);
        CHECK(svo[0].subject_np == std::vector<std::string>{"gay", "man"});
        CHECK(svo[0].verb_lemma == "celebrate");
        REQUIRE(svo[0].object_np.has_value());
        CHECK(*svo[0].object_np == std::vector<std::string>{"parade"});
        CHECK_FALSE(svo[0].negated);
        CHECK_FALSE(svo[0].object_from_passive);
    }

    SUBCASE("label on the object side") {
        auto svo = extract_svo(idx.at("s2000_01"));
        REQUIRE(svo.size() == 1);
        CHECK(svo[0].subject_np == std::vector<std::string>{"senator"});
        CHECK(svo[0].verb_lemma == "praise");
        REQUIRE(svo[0].object_np.has_value());
        CHECK(*svo[0].object_np == std::vector<std::string>{"homosexual", "activist"});
    }

    SUBCASE("passive without an active subject yields nothing") {
        CHECK(extract_svo(idx.at("s2000_03")).empty());
        CHECK(extract_subject_verb(idx.at("s2000_03")).empty());
    }

    SUBCASE("negated intransitive clause") {
        auto svo = extract_svo(idx.at("s2000_04"));
        REQUIRE(svo.size() == 1);
        CHECK(svo[0].verb_lemma == "marry");
        CHECK(svo[0].negated);
        CHECK_FALSE(svo[0].object_np.has_value());
        auto sv = extract_subject_verb(idx.at("s2000_04"));
        REQUIRE(sv.size() == 1);
        CHECK(sv[0].negated);
    }

    SUBCASE("compound object noun phrase") {
        auto svo = extract_svo(idx.at("s2000_10"));
        REQUIRE(svo.size() == 1);
        REQUIRE(svo[0].object_np.has_value());
        CHECK(*svo[0].object_np == std::vector<std::string>{"community", "program"});
    }

    SUBCASE("labels on both sides") {
        auto svo = extract_svo(idx.at("s2000_12"));
        REQUIRE(svo.size() == 1);
        CHECK(svo[0].subject_np == std::vector<std::string>{"gay", "activist"});
        CHECK(*svo[0].object_np == std::vector<std::string>{"homosexual", "leader"});
    }

    SUBCASE("acronym compound subject") {
        auto svo = extract_svo(idx.at("s2000_13"));
        REQUIRE(svo.size() == 1);
        CHECK(svo[0].subject_np == std::vector<std::string>{"lgbt", "group"});
        CHECK(svo[0].verb_lemma == "organize");
    }
}

TEST_CASE("svo tuples are a subset of subject-verb pairs") {
    auto sentences = read_conllu(fixture_dir() / "parses.conllu");
    int total_svo = 0;
    int total_sv = 0;
    for (const auto& s : sentences) {
        auto svo = extract_svo(s);
        auto sv = extract_subject_verb(s);
        total_svo += static_cast<int>(svo.size());
        total_sv += static_cast<int>(sv.size());
        std::set<std::pair<std::vector<std::string>, std::string>> pairs;
        for (const auto& p : sv) pairs.insert({p.subject_np, p.verb_lemma});
        for (const auto& t : svo) {
            CHECK(pairs.count({t.subject_np, t.verb_lemma}) == 1);
        }
    }
    CHECK(total_svo > 0);
    CHECK(total_sv >= total_svo);
}

TEST_CASE("conllu writer output re-parses to the same sentences and is a fixed point") {
    auto sentences = read_conllu(fixture_dir() / "parses.conllu");
    auto out1 = write_temp("roundtrip1.conllu", "");
    write_conllu(out1, sentences);
    auto back = read_conllu(out1);
    REQUIRE(back.size() == sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        CHECK(back[i].sent_id == sentences[i].sent_id);
        CHECK(back[i].paragraph_id == sentences[i].paragraph_id);
        REQUIRE(back[i].tokens.size() == sentences[i].tokens.size());
        for (std::size_t j = 0; j < sentences[i].tokens.size(); ++j) {
            CHECK(back[i].tokens[j].form == sentences[i].tokens[j].form);
            CHECK(back[i].tokens[j].lemma == sentences[i].tokens[j].lemma);
            CHECK(back[i].tokens[j].upos == sentences[i].tokens[j].upos);
            CHECK(back[i].tokens[j].head == sentences[i].tokens[j].head);
            CHECK(back[i].tokens[j].deprel == sentences[i].tokens[j].deprel);
        }
    }
    auto out2 = write_temp("roundtrip2.conllu", "");
    write_conllu(out2, back);
    CHECK(slurp(out1) == slurp(out2));
}

TEST_CASE("conllu reader rejects structural damage") {
    CHECK_THROWS_AS(read_conllu(write_temp("cols.conllu", "1\tword\tword\tNOUN\t_\t_\t0\troot\n")),
                    ParseError);
    CHECK_THROWS_AS(
        read_conllu(write_temp(
            "tworoots.conllu",
            "1\ta\ta\tNOUN\t_\t_\t0\troot\t_\t_\n2\tb\tb\tVERB\t_\t_\t0\troot\t_\t_\n")),
        ParseError);
    CHECK_THROWS_AS(
        read_conllu(write_temp("badhead.conllu", "1\ta\ta\tNOUN\t_\t_\t5\tnsubj\t_\t_\n")),
        ParseError);
    CHECK_THROWS_AS(read_conllu(fixture_dir() / "no_such.conllu"), Error);
}

TEST_CASE("np_contains_label matches surface forms inside noun phrases") {
    std::vector<LabelSet> labels = {
        {"gay", {"gay", "gays"}, false},
        {"homosexual", {"homosexual", "homosexuals"}, false},
        {"lgbt", {"lgbt"}, true},
    };
    CHECK(np_contains_label({"homosexual", "activist"}, labels) ==
          std::vector<std::string>{"homosexual"});
    CHECK(np_contains_label({"lgbt", "group"}, labels) == std::vector<std::string>{"lgbt"});
    CHECK(np_contains_label({"parade"}, labels).empty());
    auto both = np_contains_label({"gay", "homosexual", "leader"}, labels);
    REQUIRE(both.size() == 2);
    CHECK(both[0] == "gay");
    CHECK(both[1] == "homosexual");
}
