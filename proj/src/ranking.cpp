#include "motrank/ranking.hpp"

#include "motrank/csv.hpp"
#include "motrank/error.hpp"
#include "motrank/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace motrank {

using nlohmann::json;

std::string to_string(OrderMethod m) { return m == OrderMethod::utility ? "utility" : "copeland"; }

OrderMethod order_method_from_string(const std::string& s) {
    if (s == "utility") return OrderMethod::utility;
    if (s == "copeland") return OrderMethod::copeland;
    throw UserError("unknown ordering method: " + s + " (expected utility|copeland)");
}

Ordering order_players(const RankModel& model, const std::vector<PlayerRecord>& records,
                       OrderMethod method) {
    if (records.empty()) throw UserError("cannot order an empty player list");
    const std::size_t n = records.size();

    std::vector<double> points(n, 0.0);
    std::vector<double> margins(n, 0.0);
    if (method == OrderMethod::utility) {
        if (!std::holds_alternative<LinearModel>(model))
            throw UserError("utility ordering requires a linear model; use copeland");
        const auto& lm = std::get<LinearModel>(model);
        for (std::size_t p = 0; p < n; ++p) points[p] = score(lm, records[p].features);
    } else {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                const Preference pref =
                    predict_preference(model, records[a].features, records[b].features);
                switch (pref.winner) {
                case Winner::a_preferred: points[a] += 1.0; break;
                case Winner::b_preferred: points[b] += 1.0; break;
                case Winner::tie:
                    points[a] += 0.5;
                    points[b] += 0.5;
                    break;
                }
                margins[a] += pref.margin;
                margins[b] -= pref.margin;
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a] != points[b]) return points[a] > points[b];
        if (margins[a] != margins[b]) return margins[a] > margins[b];
        return records[a].player_id < records[b].player_id;
    });

    Ordering out;
    out.method = to_string(method);
    out.player_ids.reserve(n);
    out.scores.reserve(n);
    for (std::size_t p : order) {
        out.player_ids.push_back(records[p].player_id);
        out.scores.push_back(points[p]);
    }
    return out;
}

std::string ordering_to_json(const Ordering& ordering) {
    json j;
    j["method"] = ordering.method;
    j["factor"] = ordering.factor;
    j["player_ids"] = ordering.player_ids;
    j["scores"] = ordering.scores;
    return j.dump();
}

FeatureMatrix top_bottom_matrix(const Ordering& ordering, const Dataset& ds, std::size_t k,
                                bool normalize_over_selection) {
    const std::size_t n = ordering.player_ids.size();
    if (k == 0) throw UserError("k must be >= 1");
    if (2 * k > n)
        throw UserError("2k=" + std::to_string(2 * k) + " exceeds ranked players " +
                        std::to_string(n));

    std::vector<std::size_t> columns;
    for (std::size_t i = 0; i < k; ++i) columns.push_back(i);
    for (std::size_t i = n - k; i < n; ++i) columns.push_back(i);

    std::vector<const PlayerRecord*> selected;
    selected.reserve(columns.size());
    for (std::size_t c : columns) {
        const std::string& id = ordering.player_ids[c];
        auto it = std::find_if(ds.records.begin(), ds.records.end(),
                               [&](const PlayerRecord& r) { return r.player_id == id; });
        if (it == ds.records.end()) throw UserError("ranked player not in dataset: " + id);
        selected.push_back(&*it);
    }

    FeatureMatrix m;
    m.method = ordering.method;
    m.factor = ordering.factor;
    m.top_k = k;
    for (const auto& spec : ds.schema.features()) m.feature_names.push_back(spec.name);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        m.player_ids.push_back(ordering.player_ids[columns[c]]);
        m.scores.push_back(ordering.scores[columns[c]]);
    }

    m.values.assign(ds.schema.size(), std::vector<double>(selected.size(), 0.0));
    for (std::size_t f = 0; f < ds.schema.size(); ++f) {
        double lo, hi;
        if (normalize_over_selection) {
            lo = hi = selected.front()->features[f];
            for (const auto* r : selected) {
                lo = std::min(lo, r->features[f]);
                hi = std::max(hi, r->features[f]);
            }
        } else {
            lo = hi = ds.records.front().features[f];
            for (const auto& r : ds.records) {
                lo = std::min(lo, r.features[f]);
                hi = std::max(hi, r.features[f]);
            }
        }
        for (std::size_t c = 0; c < selected.size(); ++c) {
            const double v = selected[c]->features[f];
            m.values[f][c] = hi == lo ? 0.0 : (v - lo) / (hi - lo);
        }
    }
    return m;
}

PgmImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open PGM file: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw UserError("not a binary PGM (P5) file: " + path.string());
    std::size_t width = 0, height = 0;
    int maxval = 0;
    in >> width >> height >> maxval;
    if (!in || maxval != 255) throw UserError("unsupported PGM header in " + path.string());
    in.get(); // the single whitespace byte after the header

    PgmImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(width * height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        throw UserError("truncated PGM data in " + path.string());
    return img;
}

namespace {

void write_matrix_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write " + path.string());
    std::vector<std::string> header{"feature"};
    header.insert(header.end(), m.player_ids.begin(), m.player_ids.end());
    out << csv_join(header) << '\n';
    for (std::size_t f = 0; f < m.feature_names.size(); ++f) {
        std::vector<std::string> row{m.feature_names[f]};
        for (double v : m.values[f]) row.push_back(format_double(v));
        out << csv_join(row) << '\n';
    }
    if (!out) throw UserError("failed writing " + path.string());
}

void write_matrix_pgm(const FeatureMatrix& m, const std::filesystem::path& path, int zoom) {
    const std::size_t rows = m.feature_names.size();
    const std::size_t cols = m.player_ids.size();
    const std::size_t z = static_cast<std::size_t>(zoom);
    const std::size_t width = cols * z;
    const std::size_t height = rows * z;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write " + path.string());
    out << "P5\n" << width << ' ' << height << "\n255\n";
    std::vector<std::uint8_t> line(width);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = std::clamp(m.values[r][c], 0.0, 1.0);
            const auto pixel = static_cast<std::uint8_t>(255 - std::lround(255.0 * v));
            std::fill_n(line.begin() + static_cast<std::ptrdiff_t>(c * z), z, pixel);
        }
        for (std::size_t repeat = 0; repeat < z; ++repeat)
            out.write(reinterpret_cast<const char*>(line.data()),
                      static_cast<std::streamsize>(line.size()));
    }
    if (!out) throw UserError("failed writing " + path.string());
}

void write_matrix_sidecar(const FeatureMatrix& m, const std::filesystem::path& path, int zoom) {
    json j;
    j["factor"] = m.factor;
    j["method"] = m.method;
    j["top_k"] = m.top_k;
    j["player_ids"] = m.player_ids;
    j["scores"] = m.scores;
    j["features"] = m.feature_names;
    j["zoom"] = zoom;
    j["pgm"] = {{"width", m.player_ids.size() * static_cast<std::size_t>(zoom)},
                {"height", m.feature_names.size() * static_cast<std::size_t>(zoom)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw UserError("failed writing " + path.string());
}

} // namespace

void render_report(const FeatureMatrix& matrix, const std::filesystem::path& stem, int zoom) {
    if (zoom < 1) throw UserError("zoom must be >= 1");
    if (matrix.feature_names.size() != matrix.values.size())
        throw UserError("matrix row labels do not match value rows");
    for (const auto& row : matrix.values)
        if (row.size() != matrix.player_ids.size())
            throw UserError("matrix column labels do not match value columns");

    std::filesystem::path csv = stem;
    csv += ".csv";
    std::filesystem::path pgm = stem;
    pgm += ".pgm";
    std::filesystem::path meta = stem;
    meta += ".json";
    write_matrix_csv(matrix, csv);
    write_matrix_pgm(matrix, pgm, zoom);
    write_matrix_sidecar(matrix, meta, zoom);
}

} // namespace motrank
