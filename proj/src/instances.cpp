#include "gaussalloc/instances.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gaussalloc/errors.hpp"
#include "gaussalloc/seeding.hpp"
#include "json.hpp"

namespace gaussalloc {

namespace {

constexpr std::size_t kMaxResamplesPerSet = 10'000;
constexpr std::uint64_t kMaxCompleteSets = 1'000'000;

std::string field(const char* name, std::size_t i) {
    return std::string(name) + "[" + std::to_string(i) + "]";
}

void validate(const std::vector<double>& means, const std::vector<IndexSet>& sets,
              auto&& fail) {
    if (means.empty()) fail("n", "instance needs at least one variable");
    for (std::size_t i = 0; i < means.size(); ++i) {
        if (!std::isfinite(means[i])) fail(field("means", i), "mean must be finite");
        if (means[i] < 0.0) fail(field("means", i), "mean must be non-negative");
    }
    if (sets.empty()) fail("sets", "instance needs at least one set");
    for (std::size_t j = 0; j < sets.size(); ++j) {
        const auto& s = sets[j];
        if (s.empty()) fail(field("sets", j), "set is empty");
        for (std::size_t k = 0; k < s.size(); ++k) {
            const std::string path = field("sets", j) + "[" + std::to_string(k) + "]";
            if (s[k] >= means.size()) fail(path, "index " + std::to_string(s[k]) + " out of range");
            if (k > 0 && s[k] <= s[k - 1]) fail(path, "indices must be strictly ascending");
        }
    }
}

}  // namespace

Instance::Instance(std::vector<double> means, std::vector<IndexSet> sets)
    : means_(std::move(means)), sets_(std::move(sets)) {
    validate(means_, sets_, [](const std::string& path, const std::string& msg) {
        throw InvalidArgument(path + ": " + msg);
    });
}

std::vector<std::size_t> Instance::sets_containing(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < sets_.size(); ++j) {
        if (std::binary_search(sets_[j].begin(), sets_[j].end(), i)) out.push_back(j);
    }
    return out;
}

AllocationVector::AllocationVector(std::vector<double> stddevs) : stddevs_(std::move(stddevs)) {
    for (std::size_t i = 0; i < stddevs_.size(); ++i) {
        if (!std::isfinite(stddevs_[i]) || stddevs_[i] < 0.0) {
            throw InvalidArgument(field("stddevs", i) + ": must be finite and non-negative");
        }
    }
    if (variance_sum() > 1.0 + kBudgetTolerance) {
        throw InvalidArgument("allocation exceeds the variance budget (sum of variances " +
                              std::to_string(variance_sum()) + ")");
    }
}

double AllocationVector::variance_sum() const noexcept {
    double s = 0.0;
    for (double x : stddevs_) s += x * x;
    return s;
}

std::size_t AllocationVector::support_size() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(stddevs_.begin(), stddevs_.end(), [](double x) { return x > 0.0; }));
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    k = std::min(k, n - k);
    __extension__ typedef unsigned __int128 wide;
    wide r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > UINT64_MAX) return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(r);
}

Instance erdos_renyi_instance(std::size_t n, std::size_t m, double p, std::uint64_t seed,
                              std::size_t* resamples) {
    if (n == 0 || m == 0) throw InvalidArgument("n and m must be positive");
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in (0, 1]");

    std::vector<IndexSet> sets(m);
    std::size_t redraws = 0;
    for (std::size_t j = 0; j < m; ++j) {
        std::mt19937_64 engine(derive_seed(derive_seed(seed, "erdos-renyi"), j));
        std::bernoulli_distribution member(p);
        std::size_t attempt = 0;
        while (true) {
            IndexSet s;
            for (std::size_t i = 0; i < n; ++i) {
                if (member(engine)) s.push_back(i);
            }
            if (!s.empty()) {
                sets[j] = std::move(s);
                break;
            }
            if (++attempt >= kMaxResamplesPerSet) {
                throw InvalidArgument("set " + std::to_string(j) + " still empty after " +
                                      std::to_string(kMaxResamplesPerSet) + " draws");
            }
            ++redraws;
        }
    }
    if (resamples != nullptr) *resamples = redraws;
    return Instance(std::vector<double>(n, 0.0), std::move(sets));
}

Instance cycle_instance(std::size_t n, double mu) {
    if (n < 3) throw InvalidArgument("cycle instance needs n >= 3");
    std::vector<IndexSet> sets;
    sets.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t next = (j + 1) % n;
        sets.push_back({std::min(j, next), std::max(j, next)});
    }
    return Instance(std::vector<double>(n, mu), std::move(sets));
}

Instance complete_k_subsets_instance(std::size_t n, std::size_t k) {
    if (n == 0 || k == 0 || k > n) throw InvalidArgument("need 1 <= k <= n");
    const std::uint64_t count = binomial(n, k);
    if (count > kMaxCompleteSets) {
        throw InvalidArgument("C(" + std::to_string(n) + "," + std::to_string(k) + ") = " +
                              std::to_string(count) + " sets exceeds the limit of 10^6");
    }
    std::vector<IndexSet> sets;
    sets.reserve(count);
    IndexSet current(k);
    for (std::size_t i = 0; i < k; ++i) current[i] = i;
    while (true) {
        sets.push_back(current);
        // Advance to the next combination in lexicographic order.
        std::size_t pos = k;
        while (pos > 0 && current[pos - 1] == n - k + pos - 1) --pos;
        if (pos == 0) break;
        ++current[pos - 1];
        for (std::size_t i = pos; i < k; ++i) current[i] = current[i - 1] + 1;
    }
    return Instance(std::vector<double>(n, 0.0), std::move(sets));
}

// ---------------------------------------------------------------------------
// JSON

Instance parse_instance(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("", "instance document must be a JSON object");
    for (const char* key : {"n", "means", "sets"}) {
        if (!doc.contains(key)) throw ParseError(key, "missing field");
    }

    const auto& jn = doc["n"];
    if (!jn.is_number_integer() || jn.get<std::int64_t>() < 1) {
        throw ParseError("n", "must be a positive integer");
    }
    const auto n = static_cast<std::size_t>(jn.get<std::int64_t>());

    const auto& jmeans = doc["means"];
    if (!jmeans.is_array()) throw ParseError("means", "must be an array");
    if (jmeans.size() != n) {
        throw ParseError("means", "has " + std::to_string(jmeans.size()) + " entries, expected " +
                                      std::to_string(n));
    }
    std::vector<double> means;
    means.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!jmeans[i].is_number()) throw ParseError(field("means", i), "must be a number");
        means.push_back(jmeans[i].get<double>());
    }

    const auto& jsets = doc["sets"];
    if (!jsets.is_array()) throw ParseError("sets", "must be an array");
    std::vector<IndexSet> sets;
    sets.reserve(jsets.size());
    for (std::size_t j = 0; j < jsets.size(); ++j) {
        if (!jsets[j].is_array()) throw ParseError(field("sets", j), "must be an array");
        IndexSet s;
        for (std::size_t k = 0; k < jsets[j].size(); ++k) {
            const auto& v = jsets[j][k];
            const std::string path = field("sets", j) + "[" + std::to_string(k) + "]";
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
                throw ParseError(path, "must be a non-negative integer");
            }
            s.push_back(static_cast<std::size_t>(v.get<std::int64_t>()));
        }
        sets.push_back(std::move(s));
    }

    validate(means, sets, [](const std::string& path, const std::string& msg) {
        throw ParseError(path, msg);
    });
    return Instance(std::move(means), std::move(sets));
}

std::string serialize_instance(const Instance& inst) {
    nlohmann::ordered_json doc;
    doc["n"] = inst.n();
    doc["means"] = inst.means();
    doc["sets"] = inst.sets();
    return doc.dump() + "\n";
}

}  // namespace gaussalloc
