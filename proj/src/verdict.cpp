#include "chronoreg/verdict.hpp"

#include "chronoreg/error.hpp"

namespace chronoreg {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "PASS";
        case Verdict::warn: return "WARN";
        case Verdict::fail: return "FAIL";
        case Verdict::skipped: return "SKIPPED";
    }
    return "FAIL";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "PASS") return Verdict::pass;
    if (s == "WARN") return Verdict::warn;
    if (s == "FAIL") return Verdict::fail;
    if (s == "SKIPPED") return Verdict::skipped;
    throw ConfigError("unknown verdict '" + s + "'");
}

namespace {
int rank(Verdict v) {
    switch (v) {
        case Verdict::skipped: return 0;
        case Verdict::pass: return 1;
        case Verdict::warn: return 2;
        case Verdict::fail: return 3;
    }
    return 3;
}
}  // namespace

Verdict combine(Verdict a, Verdict b) { return rank(a) >= rank(b) ? a : b; }

}  // namespace chronoreg
