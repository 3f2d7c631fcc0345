#ifndef EFFHYP_REPORT_HPP
#define EFFHYP_REPORT_HPP

// BoundReport: the common result shape for grid inequality verification,
// serializable to CSV (columns: t, x, xi, lhs, rhs, margin, anchor) and JSON.

#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "common.hpp"

namespace effhyp {

struct BoundRow {
    double t = 0.0, x = 0.0, xi = 0.0;
    double lhs = 0.0, rhs = 0.0, margin = 0.0;
};

struct BoundReport {
    std::string description;
    std::string anchor; // inequality identifier carried into every CSV row
    std::size_t n_points = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    BoundRow worst;
    double fitted_constant = 0.0; // meaning depends on the inequality (K, C*, c, ...)
    std::vector<BoundRow> violations;
    std::map<std::string, double> extras;

    bool ok(double tol = 1e-12) const { return worst_margin >= -tol; }

    void record(const BoundRow& r) {
        ++n_points;
        if (r.margin < worst_margin) {
            worst_margin = r.margin;
            worst = r;
        }
    }
};

inline void csv_header(std::ostream& os) { os << "t,x,xi,lhs,rhs,margin,anchor\n"; }

inline void csv_row(std::ostream& os, const BoundRow& r, const std::string& anchor) {
    os << fmt_double(r.t) << ',' << fmt_double(r.x) << ',' << fmt_double(r.xi) << ','
       << fmt_double(r.lhs) << ',' << fmt_double(r.rhs) << ',' << fmt_double(r.margin) << ','
       << anchor << '\n';
}

inline void write_csv(const std::string& path, const std::vector<BoundReport>& reports, bool violations_only) {
    std::ofstream os(path);
    csv_header(os);
    for (const auto& rep : reports) {
        if (violations_only) {
            for (const auto& r : rep.violations) csv_row(os, r, rep.anchor);
        } else if (rep.n_points) {
            csv_row(os, rep.worst, rep.anchor);
        }
    }
}

} // namespace effhyp

#endif
