#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ergkit/analysis.hpp"
#include "ergkit/cli.hpp"
#include "ergkit/error.hpp"
#include "ergkit/pipeline.hpp"
#include "ergkit/scoring.hpp"
#include "ergkit/verifier.hpp"

namespace py = pybind11;
using namespace ergkit;

namespace {

py::object fraction(const Rational& r) {
  static py::object cls = py::module_::import("fractions").attr("Fraction");
  return cls(r.num(), r.den());
}

Rational rational(const py::handle& value) {
  if (py::isinstance<py::int_>(value)) return Rational(value.cast<std::int64_t>());
  if (py::hasattr(value, "numerator") && py::hasattr(value, "denominator")) {
    return Rational(value.attr("numerator").cast<std::int64_t>(), value.attr("denominator").cast<std::int64_t>());
  }
  return Rational::parse(py::str(value).cast<std::string>());
}

VerificationReport report_of(const py::handle& value) {
  if (py::isinstance<py::dict>(value)) {
    auto d = value.cast<py::dict>();
    auto constraints = d.contains("constraints") ? d["constraints"].cast<std::vector<bool>>() : std::vector<bool>{};
    auto rubrics = d.contains("rubrics") ? d["rubrics"].cast<std::vector<bool>>() : std::vector<bool>{};
    int level = d.contains("level") ? d["level"].cast<int>() : 0;
    return make_report(std::move(constraints), std::move(rubrics), level);
  }
  return make_report(value.cast<std::vector<bool>>());
}

py::dict measurements(const ResponseMeasurements& m) {
  py::dict d;
  d["paragraph_count"] = m.paragraph_count;
  d["sentence_count"] = m.sentence_count();
  d["sentence_types"] = m.sentence_types();
  d["per_paragraph_sentence_counts"] = m.per_paragraph_sentence_counts;
  d["word_count"] = m.word_count;
  d["character_count"] = m.character_count;
  d["punctuation_count"] = m.punctuation_count;
  d["bold_spans"] = m.bold_spans;
  d["unordered_list_items"] = m.unordered_list_items();
  d["numbered_list_item_count"] = m.numbered_list_item_count;
  d["quotation_count"] = m.quotation_count;
  d["bracketed_terms"] = m.bracketed_terms;
  d["line_count"] = m.line_count;
  d["special_symbol_count"] = m.special_symbol_count;
  d["language"] = m.language;
  d["leading_text"] = m.leading_text;
  d["trailing_text"] = m.trailing_text;
  d["keyword_counts"] = m.keyword_counts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ergkit, m) {
  m.doc() = "Bindings to the ergkit C++ library";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
#define ERGKIT_EXCEPTION(name) py::register_exception<name>(m, #name, base.ptr())
  ERGKIT_EXCEPTION(SchemaError);
  ERGKIT_EXCEPTION(IntegrityError);
  ERGKIT_EXCEPTION(CapacityError);
  ERGKIT_EXCEPTION(NotFoundError);
  ERGKIT_EXCEPTION(ArithmeticError);
  ERGKIT_EXCEPTION(ArgumentError);
  ERGKIT_EXCEPTION(CompileError);
  ERGKIT_EXCEPTION(UndefinedInputError);
  ERGKIT_EXCEPTION(LeakageError);
  ERGKIT_EXCEPTION(ProtocolError);
  ERGKIT_EXCEPTION(TransportError);
  ERGKIT_EXCEPTION(CredentialError);
  ERGKIT_EXCEPTION(ReplayMissError);
  ERGKIT_EXCEPTION(ConfigError);
  ERGKIT_EXCEPTION(ParseError);
#undef ERGKIT_EXCEPTION

  m.def("measure", [](const std::string& text, const std::vector<std::string>& keywords) {
    return measurements(measure(text, keywords));
  }, py::arg("text"), py::arg("keywords") = std::vector<std::string>{});

  m.def("describe", [](const std::string& spec) { return describe(parse_verifier_spec(spec)); }, py::arg("spec"),
        "Plain-text reading of a verifier-spec document.");

  m.def("verify", [](const std::string& spec, const std::string& response) {
    const auto p = parse_verifier_spec(spec);
    const std::vector<Predicate> one{p};
    return verify(p, measure(response, keyword_vocabulary(one)));
  }, py::arg("spec"), py::arg("response"));

  m.def("verify_record", [](const std::string& record_line, const std::string& response) {
    const auto record = parse_record(record_line);
    const auto predicates = record.predicates();
    return verify_instruction(predicates, response, {}, record.level).constraint_verdicts;
  }, py::arg("record"), py::arg("response"), "Constraint verdicts of `response` against one dataset line.");

  m.def("constraint_reward", [](const py::handle& r) { return fraction(constraint_reward(report_of(r))); });
  m.def("task_reward", [](const py::handle& r) { return fraction(task_reward(report_of(r))); });
  m.def("thinking_reward", [](const py::handle& s_logic, const py::handle& s_corr) {
    return fraction(thinking_reward(rational(s_logic), rational(s_corr)));
  });
  m.def("partial_reward", [](const py::handle& r_task, const py::handle& anchor) {
    return fraction(partial_reward(rational(r_task), rational(anchor)));
  });
  m.def("total_reward", [](const py::handle& r_task, const py::object& anchor, const py::handle& r_think) {
    std::optional<Rational> a;
    if (!anchor.is_none()) a = rational(anchor);
    const auto b = total_reward(rational(r_task), a, rational(r_think));
    py::dict d;
    d["r_task"] = fraction(b.r_task);
    d["r_think"] = fraction(b.r_think);
    d["r_ref"] = fraction(b.r_ref);
    d["r_total"] = fraction(b.r_total);
    return d;
  }, py::arg("r_task"), py::arg("anchor_r_task") = py::none(), py::arg("r_think") = 0);

  m.def("csr_isr", [](const py::iterable& reports) {
    std::vector<VerificationReport> rs;
    for (auto r : reports) rs.push_back(report_of(r));
    const auto s = csr_isr(rs);
    return py::make_tuple(fraction(s.csr), fraction(s.isr));
  }, py::arg("reports"), "Each report is a list of constraint verdicts or a dict with constraints, rubrics, level.");

  m.def("parse_judge_checklist", [](const std::string& reply) {
    const auto s = parse_judge_checklist(reply);
    return py::make_tuple(fraction(s.s_logic), fraction(s.s_corr), s.warnings);
  });

  m.def("group_advantages", [](const std::vector<double>& rewards, double eps_var) {
    return group_advantages(rewards, eps_var).advantages;
  }, py::arg("rewards"), py::arg("eps_var") = SurrogateParams{}.eps_var);

  m.def("grpo_surrogate", [](const std::vector<std::vector<double>>& ratios, const std::vector<double>& advantages,
                             const std::vector<double>& kl, double eps_clip, double beta) {
    SurrogateParams p;
    p.eps_clip = eps_clip;
    p.beta = beta;
    return grpo_surrogate(ratios, advantages, kl, p);
  }, py::arg("ratios"), py::arg("advantages"), py::arg("kl"), py::arg("eps_clip") = SurrogateParams{}.eps_clip,
        py::arg("beta") = SurrogateParams{}.beta);

  m.def("synthesize", [](const std::vector<int>& levels, std::size_t count, std::uint64_t seed, std::size_t workers) {
    SynthOptions o;
    o.levels = levels;
    o.count = count;
    o.seed = seed;
    o.workers = workers;
    std::vector<DatasetRecord> records;
    {
      py::gil_scoped_release release;
      MockGateway mock;
      records = synthesize(default_banks(), mock, mock, o);
    }
    std::vector<std::string> out;
    for (const auto& r : records) out.push_back(serialize_record(r));
    return out;
  }, py::arg("levels") = std::vector<int>{1, 2, 3, 4, 5}, py::arg("count") = 10, py::arg("seed") = 0,
        py::arg("workers") = 4, "Offline synthesis with the mock gateway; one JSON line per record.");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");

  m.def("network_connection_count", [] { return network_connection_count(); });
  m.attr("__version__") = ERGKIT_VERSION;
}
