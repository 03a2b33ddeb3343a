#include "motrank/pairwise.hpp"

#include "motrank/csv.hpp"
#include "motrank/error.hpp"
#include "motrank/format.hpp"

#include <cmath>
#include <fstream>

namespace motrank {

namespace {

bool clear_preference(double y_hi, double y_lo, double pt) {
    if (y_lo <= 0.0) return y_hi > y_lo;
    return (y_hi - y_lo) > pt * y_lo;
}

} // namespace

PairwiseDataset transform(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                          double pt, const std::vector<std::string>* ids) {
    if (pt < 0.0) throw UserError("preference threshold must be >= 0");
    if (X.size() != y.size())
        throw UserError("feature rows (" + std::to_string(X.size()) + ") and scores (" +
                        std::to_string(y.size()) + ") differ in length");
    if (X.size() < 2) throw UserError("pairwise transform needs at least 2 rows");
    for (double v : y)
        if (!std::isfinite(v)) throw UserError("non-finite score in pairwise transform");

    const std::size_t n = X.size();
    const std::size_t dim = X[0].size();
    for (const auto& row : X)
        if (row.size() != dim) throw UserError("ragged feature rows in pairwise transform");

    PairwiseDataset out;
    out.pt_used = pt;
    out.n_source_players = n;
    if (ids) {
        if (ids->size() != n) throw UserError("ids length does not match rows");
        out.source_ids = *ids;
    }

    for (std::size_t a = 0; a + 1 < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const bool a_higher = y[a] >= y[b];
            const std::size_t hi = a_higher ? a : b;
            const std::size_t lo = a_higher ? b : a;
            if (y[hi] == y[lo]) continue;
            if (!clear_preference(y[hi], y[lo], pt)) continue;

            PreferencePair pos;
            pos.label = 1;
            pos.i = hi;
            pos.j = lo;
            pos.diff.resize(dim);
            for (std::size_t f = 0; f < dim; ++f) pos.diff[f] = X[hi][f] - X[lo][f];

            PreferencePair neg;
            neg.label = -1;
            neg.i = hi;
            neg.j = lo;
            neg.diff.resize(dim);
            for (std::size_t f = 0; f < dim; ++f) neg.diff[f] = -pos.diff[f];

            out.pairs.push_back(std::move(pos));
            out.pairs.push_back(std::move(neg));
        }
    }
    return out;
}

RetentionStats retention_stats(const PairwiseDataset& pds) {
    if (pds.n_source_players < 2)
        throw UserError("retention stats need at least 2 source players");
    RetentionStats s;
    s.kept_pairs = pds.pairs.size();
    const double possible = static_cast<double>(pds.n_source_players) *
                            static_cast<double>(pds.n_source_players - 1);
    s.kept_fraction = static_cast<double>(s.kept_pairs) / possible;
    return s;
}

void write_pairs_csv(const PairwiseDataset& pds, const std::vector<std::string>& feature_names,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write pairs file: " + path.string());
    std::vector<std::string> row{"source_hi", "source_lo", "label"};
    for (const auto& name : feature_names) row.push_back("d:" + name);
    out << csv_join(row) << "\n";
    auto id_of = [&](std::size_t idx) {
        return pds.source_ids.empty() ? std::to_string(idx) : pds.source_ids[idx];
    };
    for (const auto& p : pds.pairs) {
        row.clear();
        row.push_back(id_of(p.i));
        row.push_back(id_of(p.j));
        row.push_back(std::to_string(p.label));
        for (double v : p.diff) row.push_back(format_double(v));
        out << csv_join(row) << "\n";
    }
    if (!out) throw UserError("write failed: " + path.string());
}

} // namespace motrank
