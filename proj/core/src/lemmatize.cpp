#include "dehum/corpus.hpp"

#include "dehum/strings.hpp"

#include <unordered_map>

namespace dehum {

namespace {

// Irregular inflections plus regular forms the suffix rules cannot recover
// (mostly latinate verbs whose stem needs a final e the rules would not add).
const std::unordered_map<std::string, std::string>& exception_table() {
    static const std::unordered_map<std::string, std::string> table = {
        {"am", "be"},       {"is", "be"},        {"are", "be"},      {"was", "be"},
        {"were", "be"},     {"been", "be"},      {"being", "be"},
        {"has", "have"},    {"had", "have"},
        {"does", "do"},     {"doing", "do"},     {"did", "do"},      {"done", "do"},
        {"goes", "go"},     {"going", "go"},     {"went", "go"},     {"gone", "go"},
        {"said", "say"},
        {"made", "make"},
        {"took", "take"},   {"taken", "take"},
        {"got", "get"},     {"gotten", "get"},
        {"gave", "give"},   {"given", "give"},
        {"came", "come"},
        {"saw", "see"},     {"seen", "see"},
        {"knew", "know"},   {"known", "know"},
        {"thought", "think"},
        {"told", "tell"},
        {"found", "find"},
        {"felt", "feel"},
        {"kept", "keep"},
        {"left", "leave"},
        {"met", "meet"},
        {"paid", "pay"},
        {"held", "hold"},
        {"stood", "stand"}, {"understood", "understand"},
        {"brought", "bring"},
        {"bought", "buy"},
        {"built", "build"},
        {"sent", "send"},
        {"spent", "spend"},
        {"lost", "lose"},
        {"won", "win"},
        {"wrote", "write"},  {"written", "write"},
        {"spoke", "speak"},  {"spoken", "speak"},
        {"broke", "break"},  {"broken", "break"},
        {"chose", "choose"}, {"chosen", "choose"},
        {"grew", "grow"},    {"grown", "grow"},
        {"drew", "draw"},    {"drawn", "draw"},
        {"fought", "fight"},
        {"caught", "catch"},
        {"taught", "teach"},
        {"sought", "seek"},
        {"ran", "run"},
        {"ate", "eat"},      {"eaten", "eat"},
        {"fell", "fall"},    {"fallen", "fall"},
        {"rose", "rise"},    {"risen", "rise"},
        {"drove", "drive"},  {"driven", "drive"},
        {"rode", "ride"},    {"ridden", "ride"},
        {"flew", "fly"},     {"flown", "fly"},
        {"began", "begin"},  {"begun", "begin"},
        {"sang", "sing"},    {"sung", "sing"},
        {"sat", "sit"},
        {"heard", "hear"},
        {"meant", "mean"},
        {"led", "lead"},
        {"dying", "die"},    {"lying", "lie"},   {"tying", "tie"},
        {"men", "man"},      {"women", "woman"}, {"children", "child"},
        {"feet", "foot"},    {"teeth", "tooth"}, {"mice", "mouse"},
        {"lives", "life"},   {"wives", "wife"},  {"knives", "knife"},
        {"halves", "half"},
        {"themselves", "themselves"}, {"ourselves", "ourselves"},
        {"heroes", "hero"},  {"echoes", "echo"},
        {"potatoes", "potato"}, {"tomatoes", "tomato"},
        {"buses", "bus"},    {"viruses", "virus"}, {"gases", "gas"},
        {"series", "series"}, {"species", "species"},
        {"movies", "movie"},
        {"news", "news"},    {"always", "always"}, {"perhaps", "perhaps"},
        {"agreed", "agree"}, {"freed", "free"},
        {"used", "use"},     {"using", "use"},
        {"focused", "focus"}, {"focusing", "focus"},
        {"added", "add"},     {"adding", "add"},
        {"controlled", "control"}, {"controlling", "control"},
        {"changed", "change"},   {"changing", "change"},
        {"charged", "charge"},   {"charging", "charge"},
        {"managed", "manage"},   {"managing", "manage"},
        {"arranged", "arrange"}, {"arranging", "arrange"},
        {"engaged", "engage"},   {"damaged", "damage"},
        {"encouraged", "encourage"}, {"challenged", "challenge"},
        {"emerged", "emerge"},   {"merged", "merge"}, {"urged", "urge"},
        {"alleged", "allege"},
        {"created", "create"},   {"creating", "create"},
        {"included", "include"}, {"including", "include"},
        {"provided", "provide"}, {"providing", "provide"},
        {"decided", "decide"},   {"deciding", "decide"},
        {"described", "describe"}, {"describing", "describe"},
        {"divided", "divide"},   {"invited", "invite"}, {"united", "unite"},
        {"required", "require"}, {"requiring", "require"},
        {"compared", "compare"}, {"comparing", "compare"},
        {"prepared", "prepare"}, {"declared", "declare"},
        {"ignored", "ignore"},   {"ignoring", "ignore"},
        {"explored", "explore"},
        {"became", "become"},    {"becoming", "become"},
        {"determined", "determine"}, {"examined", "examine"},
        {"imagined", "imagine"}, {"combined", "combine"}, {"defined", "define"},
    };
    return table;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool is_cons(char c) { return c >= 'a' && c <= 'z' && !is_vowel(c); }

int vowel_groups(std::string_view s) {
    int groups = 0;
    bool in_group = false;
    for (char c : s) {
        if (is_vowel(c)) {
            if (!in_group) ++groups;
            in_group = true;
        } else {
            in_group = false;
        }
    }
    return groups;
}

bool undoublable(char c) {
    switch (c) {
        case 'b': case 'd': case 'g': case 'k': case 'm':
        case 'n': case 'p': case 'r': case 't':
            return true;
        default:
            return false;
    }
}

// After stripping -ed/-ing: undo consonant doubling or restore a final e.
std::string fix_stem(std::string stem) {
    std::size_t n = stem.size();
    if (n < 2) return stem;
    char last = stem[n - 1];
    char prev = stem[n - 2];

    if (n >= 3 && last == prev && undoublable(last)) {
        stem.pop_back();
        return stem;
    }
    if (last == 'v' || last == 'c' || last == 'z' || last == 'u' || last == 'i')
        return stem + "e";
    if (last == 'l' && is_cons(prev) && prev != 'l')
        return stem + "e";
    if (last == 's' && is_vowel(prev))
        return stem + "e";
    if (last == 'g' && prev == 'd')
        return stem + "e";
    // -ate verbs: state -> stated, but leave treat/eat alone.
    if (n >= 3 && last == 't' && prev == 'a' && is_cons(stem[n - 3]))
        return stem + "e";
    // One-syllable consonant-vowel-consonant stems lost a final e
    // (mak-, writ-, hop-). Multisyllable stems (visit-, open-) did not.
    if (n >= 3 && is_cons(last) && last != 'w' && last != 'x' && last != 'y' &&
        is_vowel(prev) && is_cons(stem[n - 3]) && vowel_groups(stem) == 1)
        return stem + "e";
    return stem;
}

} // namespace

std::string lemmatize(std::string_view token) {
    std::string w = lower_ascii(token);
    const auto& exceptions = exception_table();
    if (auto it = exceptions.find(w); it != exceptions.end()) return it->second;

    std::size_t n = w.size();
    if (n < 3) return w;

    auto ends = [&](std::string_view suffix) {
        return std::string_view(w).ends_with(suffix);
    };

    // Plural and third-person -s.
    if (ends("ies") && n > 4) return w.substr(0, n - 3) + "y";
    if (ends("sses")) return w.substr(0, n - 2);
    if (ends("shes") || ends("ches")) return w.substr(0, n - 2);
    if (ends("xes") || ends("zes")) return w.substr(0, n - 2);
    if (ends("s") && !ends("ss") && !ends("us") && !ends("is") && n > 3)
        return w.substr(0, n - 1);

    // Past tense and gerund. Words ending -eed (need, speed) are complete.
    if (ends("eed")) return w;
    if (ends("ied") && n > 4) return w.substr(0, n - 3) + "y";
    if (ends("ed") && n >= 4) return fix_stem(w.substr(0, n - 2));
    if (ends("ing") && n >= 6) return fix_stem(w.substr(0, n - 3));

    return w;
}

} // namespace dehum
