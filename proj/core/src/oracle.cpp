#include "ctprover/oracle.hpp"

#include <random>

#include "ctprover/errors.hpp"

namespace ctprover {

namespace {

// Flattened view of the entry parameters: one field per scalar, one per
// array element, in declaration order.
struct Field {
    const Param* param;
    size_t elem;  // index when param is an array
};

std::vector<Field> fields_of(const std::vector<Param>& params) {
    std::vector<Field> out;
    for (const auto& p : params) {
        if (p.is_array)
            for (size_t i = 0; i < p.length; i++) out.push_back({&p, i});
        else
            out.push_back({&p, 0});
    }
    return out;
}

void apply_fields(InputBinding& in, const std::vector<Field>& fs, const std::vector<uint64_t>& vals) {
    for (size_t i = 0; i < fs.size(); i++) {
        const Field& f = fs[i];
        if (f.param->is_array) {
            auto& arr = in.arrays[f.param->name];
            arr.resize(f.param->length, 0);
            arr[f.elem] = vals[i];
        } else {
            in.scalars[f.param->name] = vals[i];
        }
    }
    // Arrays with no fields (length 0) cannot occur: declared lengths are >= 1
    // in practice, but make sure every array parameter is present.
    for (const auto& f : fs)
        if (f.param->is_array) in.arrays[f.param->name].resize(f.param->length, 0);
}

bool odometer_next(std::vector<uint64_t>& vals, uint64_t limit) {
    for (size_t i = 0; i < vals.size(); i++) {
        if (++vals[i] < limit) return true;
        vals[i] = 0;
    }
    return false;
}

}  // namespace

OracleResult oracle_check_ct(const Program& p, int width, const OracleLimits& limits) {
    if (!width_valid(width)) throw InputError("invalid width " + std::to_string(width));
    EntrySplit split = split_entry_params(p);
    std::vector<Field> pub_fields = fields_of(split.public_params);
    std::vector<Field> sec_fields = fields_of(split.secret_params);

    uint64_t total_bits = static_cast<uint64_t>(width) * (pub_fields.size() + sec_fields.size());
    bool exhaustive;
    switch (limits.mode) {
    case OracleLimits::Mode::Exhaustive:
        if (total_bits > static_cast<uint64_t>(limits.exhaustive_bit_cap))
            throw CapExceededError("exhaustive oracle infeasible: " + std::to_string(total_bits) +
                                   " input bits exceed cap " +
                                   std::to_string(limits.exhaustive_bit_cap));
        exhaustive = true;
        break;
    case OracleLimits::Mode::Sample:
        exhaustive = false;
        break;
    default:
        exhaustive = total_bits <= static_cast<uint64_t>(limits.exhaustive_bit_cap);
    }

    OracleResult res;
    Interpreter interp(p, width);
    const uint64_t limit = width == 64 ? 0 : (1ull << width);  // per-field value count

    enum class Scan { Done, Insecure, Budget };

    // Compares every complete secret run against the first complete one for a
    // fixed public assignment. Trace equality is transitive, so this covers
    // all pairs; the reported witness is the lexicographically least pair.
    auto check_public = [&](const std::vector<uint64_t>& pub_vals, std::vector<uint64_t> sec_vals,
                            auto&& next_secret) -> Scan {
        InputBinding base;
        apply_fields(base, pub_fields, pub_vals);
        std::optional<InputBinding> canon_in;
        Trace canon_trace;
        bool more = true;
        while (more) {
            InputBinding in = base;
            apply_fields(in, sec_fields, sec_vals);
            RunResult r = interp.run(in, limits.fuel);
            res.runs++;
            if (r.status != RunStatus::Complete) {
                res.skipped_incomplete++;
            } else if (!canon_in) {
                canon_in = in;
                canon_trace = std::move(r.trace);
            } else {
                if (res.pairs_checked >= limits.max_pairs) return Scan::Budget;
                res.pairs_checked++;
                TraceCmp cmp = traces_prefix_equal(canon_trace, r.trace);
                if (!cmp.equal) {
                    res.secure = false;
                    OracleWitness w;
                    w.inputs1 = *canon_in;
                    w.inputs2 = in;
                    w.divergence = cmp.mismatch;
                    w.trace1 = canon_trace;
                    w.trace2 = std::move(r.trace);
                    res.witness = std::move(w);
                    return Scan::Insecure;
                }
            }
            more = next_secret(sec_vals);
        }
        return Scan::Done;
    };

    if (exhaustive) {
        auto next = [&](std::vector<uint64_t>& v) { return odometer_next(v, limit); };
        std::vector<uint64_t> pub_vals(pub_fields.size(), 0);
        bool budget_hit = false;
        bool more = true;
        while (more) {
            Scan sc = check_public(pub_vals, std::vector<uint64_t>(sec_fields.size(), 0), next);
            if (sc == Scan::Insecure) break;
            if (sc == Scan::Budget) {
                budget_hit = true;
                break;
            }
            more = odometer_next(pub_vals, limit);
        }
        res.exhausted = res.secure && !budget_hit;
    } else {
        std::mt19937_64 rng(limits.seed);
        auto rand_vals = [&](size_t n) {
            std::vector<uint64_t> v(n);
            for (auto& x : v) x = rng() & (width == 64 ? ~0ull : (limit - 1));
            return v;
        };
        for (int i = 0; i < limits.sample_publics && res.secure; i++) {
            std::vector<uint64_t> pub_vals = rand_vals(pub_fields.size());
            int drawn = 0;
            auto next = [&](std::vector<uint64_t>& v) {
                if (++drawn >= limits.sample_secrets) return false;
                v = rand_vals(sec_fields.size());
                return true;
            };
            if (check_public(pub_vals, rand_vals(sec_fields.size()), next) != Scan::Done) break;
        }
        res.exhausted = false;
    }
    return res;
}

bool witness_replays(const Program& p, int width, const OracleWitness& w, uint64_t fuel) {
    Interpreter interp(p, width);
    RunResult r1 = interp.run(w.inputs1, fuel);
    RunResult r2 = interp.run(w.inputs2, fuel);
    if (r1.status != RunStatus::Complete || r2.status != RunStatus::Complete) return false;
    TraceCmp cmp = traces_prefix_equal(r1.trace, r2.trace);
    return !cmp.equal && cmp.mismatch == w.divergence;
}

}  // namespace ctprover
