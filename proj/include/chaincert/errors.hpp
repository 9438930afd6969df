#pragma once

#include <stdexcept>
#include <string>

namespace chaincert {

// Every domain error carries a short stable code used by the CLI's
// machine-readable error output and by tests.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct BadParams : Error {
    explicit BadParams(const std::string& msg) : Error("BadParams", msg) {}
};

struct NotNice : Error {
    explicit NotNice(const std::string& msg) : Error("NotNice", msg) {}
};

struct SizeCap : Error {
    explicit SizeCap(const std::string& msg) : Error("SizeCap", msg) {}
};

struct TooLarge : Error {
    explicit TooLarge(const std::string& msg) : Error("TooLarge", msg) {}
};

// Projection incompatibility, with the witness pair of sample indices:
// the points agree on the retained coordinates but their images do not.
struct Incompatible : Error {
    Incompatible(int a, int b)
        : Error("Incompatible",
                "projection incompatible: witness sample pair (" + std::to_string(a) +
                    ", " + std::to_string(b) + ")"),
          witness_a(a), witness_b(b) {}
    int witness_a;
    int witness_b;
};

struct NotChainTransitive : Error {
    explicit NotChainTransitive(int cover_index)
        : Error("NotChainTransitive",
                "chain graph not strongly connected at cover index " +
                    std::to_string(cover_index)),
          cover_index(cover_index) {}
    int cover_index;
};

struct LadderNotRefining : Error {
    explicit LadderNotRefining(const std::string& msg) : Error("LadderNotRefining", msg) {}
};

struct BudgetExhausted : Error {
    explicit BudgetExhausted(const std::string& msg) : Error("BudgetExhausted", msg) {}
};

struct EmptyResult : Error {
    explicit EmptyResult(const std::string& msg) : Error("EmptyResult", msg) {}
};

struct OutOfDomain : Error {
    explicit OutOfDomain(const std::string& msg) : Error("OutOfDomain", msg) {}
};

struct OutOfRange : Error {
    explicit OutOfRange(const std::string& msg) : Error("OutOfRange", msg) {}
};

struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& msg) : Error("LengthMismatch", msg) {}
};

struct NotFiniteToOne : Error {
    NotFiniteToOne(long long value, long long fiber)
        : Error("NotFiniteToOne",
                "fiber of value " + std::to_string(value) + " has size " +
                    std::to_string(fiber) + ", exceeding the configured cap"),
          value(value), fiber(fiber) {}
    long long value;
    long long fiber;
};

}  // namespace chaincert
