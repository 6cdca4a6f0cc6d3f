#include "plsel/porter_stemmer.hpp"

#include <algorithm>

namespace plsel {

namespace {

// Follows the structure of Porter's reference implementation: `b` holds the
// word, `k` is the index of its last letter and `j` marks the stem end after a
// successful ends() check.
class Stemmer {
public:
    explicit Stemmer(std::string_view word) : b_(word), k_(static_cast<int>(word.size()) - 1) {}

    std::string run() {
        if (k_ > 1) {
            step1ab();
            if (k_ > 0) {
                step1c();
                step2();
                step3();
                step4();
                step5();
            }
        }
        return b_.substr(0, static_cast<std::size_t>(k_ + 1));
    }

private:
    bool cons(int i) const {
        switch (b_[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !cons(i - 1);
            default: return true;
        }
    }

    // Number of VC sequences in b[0..j].
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i)
            if (!cons(i)) return true;
        return false;
    }

    bool double_consonant(int j) const {
        if (j < 1) return false;
        if (b_[j] != b_[j - 1]) return false;
        return cons(j);
    }

    // consonant-vowel-consonant ending at i, last consonant not w, x or y
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char ch = b_[i];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        const int len = static_cast<int>(s.size());
        if (len > k_ + 1) return false;
        if (b_.compare(static_cast<std::size_t>(k_ - len + 1), s.size(), s) != 0) return false;
        j_ = k_ - len;
        return true;
    }

    void set_to(std::string_view s) {
        b_.replace(static_cast<std::size_t>(j_ + 1), std::string::npos, s);
        k_ = j_ + static_cast<int>(s.size());
    }

    void replace_if_measure(std::string_view s) {
        if (m() > 0) set_to(s);
    }

    void step1ab() {
        if (b_[k_] == 's') {
            if (ends("sses")) k_ -= 2;
            else if (ends("ies")) set_to("i");
            else if (b_[k_ - 1] != 's') --k_;
            b_.resize(static_cast<std::size_t>(k_ + 1));
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            b_.resize(static_cast<std::size_t>(k_ + 1));
            if (ends("at")) set_to("ate");
            else if (ends("bl")) set_to("ble");
            else if (ends("iz")) set_to("ize");
            else if (double_consonant(k_)) {
                --k_;
                const char ch = b_[k_];
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else {
                j_ = k_;
                if (m() == 1 && cvc(k_)) set_to("e");
            }
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
    }

    // Tries each (suffix, replacement) pair in order; the first matching
    // suffix ends the step whether or not the measure condition holds.
    template <std::size_t N>
    void rules(const std::pair<std::string_view, std::string_view> (&table)[N]) {
        for (const auto& [suffix, repl] : table) {
            if (ends(suffix)) {
                replace_if_measure(repl);
                return;
            }
        }
    }

    void step2() {
        if (k_ < 1) return;
        switch (b_[k_ - 1]) {
            case 'a': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"ational", "ate"}, {"tional", "tion"}};
                rules(t);
                break;
            }
            case 'c': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"enci", "ence"}, {"anci", "ance"}};
                rules(t);
                break;
            }
            case 'e': {
                static const std::pair<std::string_view, std::string_view> t[] = {{"izer", "ize"}};
                rules(t);
                break;
            }
            case 'l': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"bli", "ble"}, {"alli", "al"}, {"entli", "ent"}, {"eli", "e"}, {"ousli", "ous"}};
                rules(t);
                break;
            }
            case 'o': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"ization", "ize"}, {"ation", "ate"}, {"ator", "ate"}};
                rules(t);
                break;
            }
            case 's': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"alism", "al"}, {"iveness", "ive"}, {"fulness", "ful"}, {"ousness", "ous"}};
                rules(t);
                break;
            }
            case 't': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"aliti", "al"}, {"iviti", "ive"}, {"biliti", "ble"}};
                rules(t);
                break;
            }
            case 'g': {
                static const std::pair<std::string_view, std::string_view> t[] = {{"logi", "log"}};
                rules(t);
                break;
            }
            default: break;
        }
    }

    void step3() {
        switch (b_[k_]) {
            case 'e': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}};
                rules(t);
                break;
            }
            case 'i': {
                static const std::pair<std::string_view, std::string_view> t[] = {{"iciti", "ic"}};
                rules(t);
                break;
            }
            case 'l': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"ical", "ic"}, {"ful", ""}};
                rules(t);
                break;
            }
            case 's': {
                static const std::pair<std::string_view, std::string_view> t[] = {{"ness", ""}};
                rules(t);
                break;
            }
            default: break;
        }
    }

    void step4() {
        if (k_ < 1) return;
        bool matched = false;
        switch (b_[k_ - 1]) {
            case 'a': matched = ends("al"); break;
            case 'c': matched = ends("ance") || ends("ence"); break;
            case 'e': matched = ends("er"); break;
            case 'i': matched = ends("ic"); break;
            case 'l': matched = ends("able") || ends("ible"); break;
            case 'n': matched = ends("ant") || ends("ement") || ends("ment") || ends("ent"); break;
            case 'o':
                if (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) matched = true;
                else matched = ends("ou");
                break;
            case 's': matched = ends("ism"); break;
            case 't': matched = ends("ate") || ends("iti"); break;
            case 'u': matched = ends("ous"); break;
            case 'v': matched = ends("ive"); break;
            case 'z': matched = ends("ize"); break;
            default: break;
        }
        if (matched && m() > 1) {
            k_ = j_;
            b_.resize(static_cast<std::size_t>(k_ + 1));
        }
    }

    void step5() {
        j_ = k_;
        if (b_[k_] == 'e') {
            const int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        // m() still measures up to the original end, as in the reference.
        if (b_[k_] == 'l' && double_consonant(k_) && m() > 1) --k_;
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    std::string b_;
    int k_;
    int j_ = 0;
};

}  // namespace

std::string porter_stem(std::string_view word) {
    if (word.size() <= 2) return std::string(word);
    if (!std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; }))
        return std::string(word);
    return Stemmer(word).run();
}

}  // namespace plsel
