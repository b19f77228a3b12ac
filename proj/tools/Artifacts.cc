//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tools/Artifacts.cc
//---------------------------------------------------------------------------//
#include "Artifacts.hh"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace ltid::app
{
using nlohmann::json;

//---------------------------------------------------------------------------//
std::uint64_t fnv1a(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : data)
    {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex(std::uint64_t value)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(value));
    return buf;
}

void atomic_write(std::string const& path, std::string const& contents)
{
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << contents;
        out.flush();
        if (!out)
        {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("failed to write " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

void write_artifact(std::string const& path, json body, json const& config)
{
    body["config"] = config;
    std::string payload = body.dump();
    body["hash"] = {{"algorithm", "fnv1a-64"}, {"value", hex(fnv1a(payload))}};
    atomic_write(path, body.dump(2) + "\n");
}

json read_json(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

//---------------------------------------------------------------------------//
std::string measurements_csv(MeasurementSet const& set,
                             Discretization const& disc)
{
    std::ostringstream os;
    os.precision(17);
    os << "probe_id,step,t,ordinate_index,boundary_index,re,im,weight\n";
    for (size_t j = 0; j < set.records.size(); ++j)
    {
        auto const& rec = set.records[j];
        int m = rec.probe.m_tilde;
        auto const& time = rec.flux.time();
        for (int n = 0; n < time.levels(); ++n)
        {
            for (int b : disc.split.outgoing[m])
            {
                Complex v = rec.flux.at(n, m, b);
                os << j << ',' << n << ',' << time.t(n) << ',' << m << ','
                   << b << ',' << v.real() << ',' << v.imag() << ','
                   << time.weight(n) * disc.split.w(m, b) << '\n';
            }
        }
    }
    return os.str();
}

MeasurementSet parse_measurements_csv(std::string const& text,
                                      std::vector<ProbeSpec> const& probes,
                                      Discretization const& disc)
{
    MeasurementSet set;
    for (auto const& p : probes)
    {
        MeasurementRecord rec{p,
                              BoundaryFlux(Side::outgoing, disc.time,
                                           disc.angles.M,
                                           disc.grid.num_boundary(),
                                           {p.m_tilde})};
        rec.flux.carrier = p.lambda;
        set.records.push_back(std::move(rec));
    }
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (line.rfind("probe_id,step,t,ordinate_index,boundary_index", 0) != 0)
        throw std::runtime_error("measurement CSV has an unexpected header");
    int row = 1;
    while (std::getline(in, line))
    {
        ++row;
        if (line.empty())
            continue;
        long j, n, m, b;
        double t, re, im, w;
        if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%ld,%ld,%lf,%lf,%lf", &j,
                        &n, &t, &m, &b, &re, &im, &w)
            != 8)
        {
            throw std::runtime_error("measurement CSV row "
                                     + std::to_string(row) + " is malformed");
        }
        if (j < 0 || size_t(j) >= set.records.size() || n < 0
            || n >= disc.time.levels() || b < 0
            || b >= disc.grid.num_boundary()
            || m != set.records[j].probe.m_tilde)
        {
            throw std::runtime_error("measurement CSV row "
                                     + std::to_string(row)
                                     + " does not match the design or grid");
        }
        set.records[j].flux.at(n, m, b) = Complex(re, im);
    }
    set.provenance = "read from CSV";
    return set;
}

//---------------------------------------------------------------------------//
std::string svg_plot(std::string const& title, std::string const& xlabel,
                     std::string const& ylabel, std::vector<Series> const& s,
                     bool log_y)
{
    constexpr double W = 640, H = 420, L = 80, R = 160, Tm = 40, B = 60;
    auto ty = [log_y](double y) { return log_y ? std::log10(y) : y; };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (auto const& series : s)
    {
        for (size_t i = 0; i < series.x.size(); ++i)
        {
            if (log_y && !(series.y[i] > 0))
                continue;
            x0 = std::min(x0, series.x[i]);
            x1 = std::max(x1, series.x[i]);
            y0 = std::min(y0, ty(series.y[i]));
            y1 = std::max(y1, ty(series.y[i]));
        }
    }
    if (x0 > x1)
    {
        x0 = y0 = 0;
        x1 = y1 = 1;
    }
    if (x1 == x0)
        x1 = x0 + 1;
    if (y1 == y0)
        y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) {
        return H - B - (ty(y) - y0) / (y1 - y0) * (H - Tm - B);
    };

    static char const* const colors[]
        = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
       << "\" height=\"" << H << "\" font-family=\"sans-serif\" "
       << "font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-size=\"15\">" << title << "</text>\n"
       << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R
       << "\" height=\"" << H - Tm - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k)
    {
        double fx = x0 + k * (x1 - x0) / 4;
        double fy = y0 + k * (y1 - y0) / 4;
        double sx = L + k * (W - L - R) / 4;
        double sy = H - B - k * (H - Tm - B) / 4;
        os << "<text x=\"" << sx << "\" y=\"" << H - B + 16
           << "\" text-anchor=\"middle\">" << fx << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << sy + 4
           << "\" text-anchor=\"end\">"
           << (log_y ? "1e" + std::to_string(fy).substr(0, 5)
                     : std::to_string(fy).substr(0, 7))
           << "</text>\n";
    }
    os << "<text x=\"" << L + (W - L - R) / 2 << "\" y=\"" << H - 20
       << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
       << "<text x=\"16\" y=\"" << Tm + (H - Tm - B) / 2
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << Tm + (H - Tm - B) / 2 << ")\">" << ylabel << "</text>\n";
    for (size_t k = 0; k < s.size(); ++k)
    {
        char const* color = colors[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"2\" points=\"";
        for (size_t i = 0; i < s[k].x.size(); ++i)
        {
            if (log_y && !(s[k].y[i] > 0))
                continue;
            os << px(s[k].x[i]) << ',' << py(s[k].y[i]) << ' ';
        }
        os << "\"/>\n";
        double ly = Tm + 16 + 18 * k;
        os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\""
           << W - R + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n<text x=\"" << W - R + 42
           << "\" y=\"" << ly + 4 << "\">" << s[k].label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

//---------------------------------------------------------------------------//
json design_json(DesignResult const& d, AngularGrid const& angles)
{
    auto matrix = [](Eigen::MatrixXd const& a) {
        json rows = json::array();
        for (int i = 0; i < a.rows(); ++i)
        {
            json row = json::array();
            for (int k = 0; k < a.cols(); ++k)
                row.push_back(a(i, k));
            rows.push_back(row);
        }
        return rows;
    };
    json probes = json::array();
    for (int j = 0; j < d.k(); ++j)
    {
        Vec2 om = angles.directions[d.directions[j]];
        probes.push_back({{"ordinate", d.directions[j]},
                          {"direction", {om.x, om.y}},
                          {"center", {d.bumps[j].center.x,
                                      d.bumps[j].center.y}},
                          {"width", d.bumps[j].width},
                          {"amplitude", d.bumps[j].amplitude}});
    }
    json out = {{"case", d.kind == ProbeCase::b ? "b" : "a"},
                {"M", angles.M},
                {"probes", probes},
                {"A", matrix(d.A)},
                {"s_min", d.s_min},
                {"cond", d.cond},
                {"singular", d.singular},
                {"seed", d.seed},
                {"norm_equivalence", d.norm_equivalence},
                {"norm_equivalence_bound", d.norm_equivalence_bound}};
    if (d.kind == ProbeCase::b)
    {
        out["B"] = matrix(d.B);
        out["cond_B"] = d.cond_B;
    }
    return out;
}

DesignResult design_from_json(json const& j)
{
    auto matrix = [](json const& rows) {
        Eigen::MatrixXd a(rows.size(), rows.empty() ? 0 : rows[0].size());
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t k = 0; k < rows[i].size(); ++k)
                a(i, k) = rows[i][k].get<double>();
        return a;
    };
    DesignResult d;
    d.kind = j.at("case").get<std::string>() == "b" ? ProbeCase::b
                                                    : ProbeCase::a;
    for (auto const& p : j.at("probes"))
    {
        d.directions.push_back(p.at("ordinate").get<int>());
        Bump bump;
        bump.center = {p.at("center")[0].get<double>(),
                       p.at("center")[1].get<double>()};
        bump.width = p.at("width").get<double>();
        bump.amplitude = p.at("amplitude").get<double>();
        d.bumps.push_back(bump);
    }
    d.A = matrix(j.at("A"));
    d.s_min = j.at("s_min").get<double>();
    d.cond = j.at("cond").get<double>();
    d.singular = j.at("singular").get<bool>();
    d.seed = j.at("seed").get<std::uint64_t>();
    d.norm_equivalence = j.value("norm_equivalence", 0.0);
    d.norm_equivalence_bound = j.value("norm_equivalence_bound", 0.0);
    if (d.kind == ProbeCase::b)
    {
        d.B = matrix(j.at("B"));
        d.cond_B = j.at("cond_B").get<double>();
    }
    return d;
}

json result_json(ReconstructionResult const& r)
{
    std::vector<double> beta(r.beta.data(), r.beta.data() + r.beta.size());
    char const* status = r.status == ReconstructionStatus::converged
                             ? "converged"
                         : r.status == ReconstructionStatus::diverged
                             ? "diverged"
                             : "max_iterations";
    return {{"beta", beta},
            {"residuals", r.residuals},
            {"updates", r.updates},
            {"iterations", r.iterations},
            {"status", status},
            {"mode", r.mode == ReconstructionMode::ballistic ? "ballistic"
                                                             : "iterative"},
            {"lambda", r.lambda},
            {"r", r.r}};
}

//---------------------------------------------------------------------------//
}  // namespace ltid::app
