#include "commands.hpp"
#include "eldyn/brushmodel.hpp"
#include "eldyn/config.hpp"
#include "eldyn/conjugacy.hpp"
#include "eldyn/errors.hpp"
#include "eldyn/io.hpp"
#include "eldyn/pipeline.hpp"
#include "eldyn/projection.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>

namespace py = pybind11;
using namespace eldyn;

namespace {

py::object to_py(const io::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

io::Json from_py(const py::object& o) {
    return io::Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::object fraction(const Rational& r) {
    return py::module_::import("fractions")
        .attr("Fraction")(py::int_(py::str(boost::multiprecision::numerator(r).str())),
                          py::int_(py::str(boost::multiprecision::denominator(r).str())));
}

Rational rational(const py::handle& o) {
    const auto F = py::module_::import("fractions").attr("Fraction")(o);
    return Rational(boost::multiprecision::cpp_int(py::str(F.attr("numerator")).cast<std::string>()),
                    boost::multiprecision::cpp_int(py::str(F.attr("denominator")).cast<std::string>()));
}

TractId tract(const py::handle& o) {
    if (py::isinstance<TractId>(o)) return o.cast<TractId>();
    if (py::isinstance<py::int_>(o)) return {1, o.cast<long>()};
    const auto t = o.cast<py::sequence>();
    if (t.size() != 2) throw py::value_error("tract ids are k or (sign, k)");
    return {t[0].cast<int>(), t[1].cast<long>()};
}

std::vector<TractId> tracts(const py::iterable& xs) {
    std::vector<TractId> out;
    for (const auto& x : xs) out.push_back(tract(x));
    return out;
}

const char* kind_name(EscapeVerdict::Kind k) {
    switch (k) {
        case EscapeVerdict::Kind::escaping: return "escaping";
        case EscapeVerdict::Kind::reentered: return "reentered";
        default: return "undecided";
    }
}

py::dict sample_dict(const HairSample& s) {
    py::dict d;
    d["t"] = s.t;
    d["position"] = s.point.position;
    d["plane_position"] = s.point.plane_position;
    d["depth"] = s.point.depth;
    d["error"] = s.point.error.total(std::abs(s.point.position));
    return d;
}

}  // namespace

PYBIND11_MODULE(_eldyn, m) {
    m.doc() = "Hairs, ray tails and conjugacies of exponential-type entire maps";
    m.attr("__version__") = io::version();

    auto base = py::register_exception<Error>(m, "EldynError", PyExc_RuntimeError);
#define ELDYN_PY_ERROR(Name) py::register_exception<Name>(m, #Name, base.ptr())
    ELDYN_PY_ERROR(DomainError);
    ELDYN_PY_ERROR(BranchCutError);
    ELDYN_PY_ERROR(UnsupportedRegion);
    ELDYN_PY_ERROR(ContractRegimeError);
    ELDYN_PY_ERROR(AddressNotRealized);
    ELDYN_PY_ERROR(UnresolvedTail);
    ELDYN_PY_ERROR(ItineraryUnreadable);
    ELDYN_PY_ERROR(OrbitLeftHalfPlane);
    ELDYN_PY_ERROR(TailTooShort);
    ELDYN_PY_ERROR(NotConverged);
    ELDYN_PY_ERROR(PreconditionError);
    ELDYN_PY_ERROR(ConfigError);
#undef ELDYN_PY_ERROR

    py::class_<FunctionFamily>(m, "FunctionFamily")
        .def_static("exponential", &FunctionFamily::exponential, py::arg("lam") = Complex{1.0, 0.0})
        .def_static("exp_pair", &FunctionFamily::exp_pair, py::arg("a"), py::arg("b"))
        .def_static("domain_rescaled", &FunctionFamily::domain_rescaled, py::arg("base"), py::arg("lam"))
        .def_static("range_rescaled", &FunctionFamily::range_rescaled, py::arg("base"), py::arg("lam"))
        .def_static("from_json", [](const py::object& d) { return io::family_from(from_py(d)); })
        .def("to_json", [](const FunctionFamily& f) { return to_py(io::to_json(f)); })
        .def_property_readonly("K", &FunctionFamily::K)
        .def_property_readonly("L", &FunctionFamily::L)
        .def_property_readonly("is_pair", &FunctionFamily::is_pair)
        .def("with_radii", &FunctionFamily::with_radii, py::arg("K"), py::arg("L"))
        .def("__call__", [](const FunctionFamily& f, Complex z) {
            const auto e = evaluate(f, z);
            return e.escaped ? py::object(py::none()) : py::cast(e.value);
        }, "f(z), or None on overflow")
        .def("log_modulus", [](const FunctionFamily& f, Complex z) { return evaluate(f, z).log_modulus; })
        .def("__repr__", &FunctionFamily::describe);

    m.def("disjoint_type_rescale", [](const FunctionFamily& f, const std::string& mode) {
        if (mode != "domain" && mode != "range") throw py::value_error("mode is 'domain' or 'range'");
        const auto r = disjoint_type_rescale(f, mode == "range" ? RescaleMode::range : RescaleMode::domain);
        return py::make_tuple(r.lambda, r.g);
    }, py::arg("f"), py::arg("mode") = "domain", "(lambda, g) with g of disjoint type");

    py::class_<TractId>(m, "TractId")
        .def(py::init([](int sign, long k) { return TractId{sign, k}; }), py::arg("sign"), py::arg("k"))
        .def_readonly("sign", &TractId::sign)
        .def_readonly("k", &TractId::k)
        .def("__eq__", [](const TractId& a, const TractId& b) { return a == b; })
        .def("__hash__", [](const TractId& t) { return py::hash(py::make_tuple(t.sign, t.k)); })
        .def("__repr__", [](const TractId& t) { return to_string(t); });

    py::class_<ExternalAddress>(m, "ExternalAddress")
        .def(py::init([](const py::iterable& prefix, const py::iterable& period) {
                 return ExternalAddress(tracts(prefix), tracts(period));
             }),
             py::arg("prefix"), py::arg("period"), "prefix . period^inf; entries are k, (sign, k) or TractId")
        .def_static("constant", [](const py::object& t) { return ExternalAddress::constant(tract(t)); })
        .def_property_readonly("prefix", &ExternalAddress::prefix)
        .def_property_readonly("period", &ExternalAddress::period)
        .def("at", &ExternalAddress::at, py::arg("n"))
        .def("shift", &ExternalAddress::shift, py::arg("n") = 1)
        .def("__eq__", [](const ExternalAddress& a, const ExternalAddress& b) { return a == b; })
        .def("__repr__", &ExternalAddress::to_string);

    py::class_<LogTransform>(m, "LogTransform")
        .def(py::init<FunctionFamily>())
        .def_property_readonly("log_L", &LogTransform::log_L)
        .def("tract_of", [](const LogTransform& F, Complex w) -> py::object {
            const auto t = F.tract_of(w);
            return t.id ? py::cast(*t.id) : py::object(py::none());
        })
        .def("__call__", [](const LogTransform& F, Complex w) {
            const auto img = F.eval(w);
            return py::make_tuple(img.escaped ? py::object(py::none()) : py::cast(img.value), img.tract);
        }, "(F(w) or None on overflow, tract of w)")
        .def("inverse_branch", [](const LogTransform& F, const py::object& t, Complex v) {
            return F.inverse_branch(tract(t), v);
        })
        .def("derivative", &LogTransform::derivative)
        .def("expansion_bound", [](const LogTransform& F, Complex w) {
            const auto e = expansion_lower_bound(F, w);
            return py::make_tuple(e.bound, e.actual);
        }, "((Re F(w) - log L) / 4 pi, |F'(w)|)");

    py::class_<RayTracer, std::shared_ptr<RayTracer>>(m, "RayTracer")
        .def(py::init([](const FunctionFamily& g, long k_max) {
                 RayConfig rc;
                 rc.k_max = k_max;
                 return std::make_shared<RayTracer>(LogTransform(g), rc);
             }),
             py::arg("g"), py::arg("k_max") = 16)
        .def("tail_point", [](const RayTracer& tr, const ExternalAddress& s, double t) {
            py::gil_scoped_release nogil;
            return tr.tail_point(s, t);
        }, py::arg("address"), py::arg("t"))
        .def("trace_tail", [](const RayTracer& tr, const ExternalAddress& s, double t_min, double t_max, double tol) {
            std::optional<HairTail> tail;
            {
                py::gil_scoped_release nogil;
                tail = tr.trace_tail(s, t_min, t_max, tol);
            }
            py::list out;
            for (const auto& smp : tail->samples) out.append(sample_dict(smp));
            return out;
        }, py::arg("address"), py::arg("t_min"), py::arg("t_max"), py::arg("tol") = 1e-10)
        .def("x_base", py::overload_cast<const ExternalAddress&>(&RayTracer::x_base, py::const_))
        .def("address_order", [](const RayTracer& tr, const ExternalAddress& a, const ExternalAddress& b) {
            const auto o = tr.address_order(a, b);
            return o < 0 ? -1 : (o > 0 ? 1 : 0);
        });
    py::class_<HairSample>(m, "HairSample")
        .def_readonly("t", &HairSample::t)
        .def_property_readonly("position", [](const HairSample& s) { return s.point.position; })
        .def_property_readonly("plane_position", [](const HairSample& s) { return s.point.plane_position; })
        .def_property_readonly("error", [](const HairSample& s) { return s.point.error.total(std::abs(s.point.position)); });

    m.def("escape_test", [](const FunctionFamily& f, Complex z, double R, int horizon) {
        const auto v = escape_test(f, z, R, horizon);
        return py::make_tuple(kind_name(v.kind), v.n);
    }, py::arg("f"), py::arg("z"), py::arg("R"), py::arg("horizon"), "(verdict, n)");

    py::class_<AffineBrush>(m, "AffineBrush")
        .def_static("from_json", [](const py::object& d) { return io::brush_from(from_py(d)); })
        .def_static("random", [](int n, std::uint64_t seed, const py::object& lam, const py::object& Q) {
            return AffineBrush::random(n, seed, rational(lam), rational(Q));
        }, py::arg("n_hairs"), py::arg("seed"), py::arg("lam") = 2, py::arg("Q") = 3)
        .def("to_json", [](const AffineBrush& B) { return to_py(io::to_json(B)); })
        .def("zn", [](const AffineBrush& B, const std::string& h, int n) { return fraction(zn_oracle(B, h, n)); })
        .def("z_infinity", [](const AffineBrush& B, const std::string& h) { return fraction(z_infinity(B, h)); })
        .def("pi", [](const AffineBrush& B, const std::string& h, const py::object& t) {
            const auto p = pi_model(B, {h, rational(t)});
            return py::make_tuple(p.hair, fraction(p.t));
        }, py::arg("hair"), py::arg("t"))
        .def("axioms", [](const AffineBrush& B) { return to_py(io::to_json(check_brush_axioms(B))); })
        .def("crossing_count", [](const AffineBrush& B, const py::object& Q) { return crossing_count(B, rational(Q)); });

    m.def("verify_conjugacy", [](const FunctionFamily& f, py::object lam, std::optional<double> Q, int depth,
                                 int samples, std::uint64_t seed) {
        ConjugacyReport rep;
        {
            const ConjugacyMap C = lam.is_none() ? make_conjugacy(f, Q, depth)
                                                 : make_conjugacy(f, lam.cast<Complex>(), Q, depth);
            py::gil_scoped_release nogil;
            rep = verify_conjugacy(C, samples, seed);
        }
        return to_py(io::to_json(rep));
    }, py::arg("f"), py::arg("lam") = py::none(), py::arg("Q") = py::none(), py::arg("depth") = 64,
       py::arg("samples") = 1000, py::arg("seed") = 1);

    m.def("theta", [](const FunctionFamily& f, Complex w, py::object lam) {
        const ConjugacyMap C = lam.is_none() ? make_conjugacy(f) : make_conjugacy(f, lam.cast<Complex>(), std::nullopt);
        const auto v = theta_log(C, w);
        return py::make_tuple(v.value, v.error.total(std::abs(v.value)));
    }, py::arg("f"), py::arg("w"), py::arg("lam") = py::none(), "(Theta(w), error) in logarithmic coordinates");

    m.def("criniferous_pipeline", [](const FunctionFamily& f, Complex z, double R, int horizon) {
        std::optional<PipelineResult> r;
        {
            py::gil_scoped_release nogil;
            r = criniferous_pipeline(f, z, R, horizon);
        }
        return to_py(io::to_json(*r, f.is_pair()));
    }, py::arg("f"), py::arg("z"), py::arg("R") = 10.0, py::arg("horizon") = 20);

    m.def("run", [](const std::string& command, const py::object& config, const std::string& out) {
        RunConfig c = config.is_none() ? RunConfig{} : parse_config(from_py(config));
        c.out = out;
        using Cmd = int (*)(const RunConfig&);
        static const std::map<std::string, Cmd> cmds{{"trace", cli::cmd_trace},         {"render", cli::cmd_render},
                                                     {"project", cli::cmd_project},     {"conjugate", cli::cmd_conjugate},
                                                     {"brush", cli::cmd_brush},         {"verify", cli::cmd_verify}};
        const auto it = cmds.find(command);
        if (it == cmds.end()) throw py::value_error("unknown command " + command);
        py::gil_scoped_release nogil;
        return it->second(c);
    }, py::arg("command"), py::arg("config"), py::arg("out"), "Run a CLI subcommand; returns its exit code");

    m.def("canonical_config", [](const py::object& config) {
        return to_py(to_json(config.is_none() ? RunConfig{} : parse_config(from_py(config))));
    }, py::arg("config") = py::none(), "Config with every default filled in");
    m.def("config_hash", [](const py::object& config) { return parse_config(from_py(config)).hash(); });
}
