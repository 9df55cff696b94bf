#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dockmeta/extract.hpp"
#include "dockmeta/package.hpp"
#include "dockmeta/pipeline.hpp"
#include "dockmeta/recommend.hpp"
#include "dockmeta/registry.hpp"

namespace py = pybind11;
using namespace dockmeta;

namespace {

py::dict span_to_dict(const SourceSpan& span) {
    py::dict d;
    d["path"] = span.path;
    d["start_line"] = span.start_line;
    d["end_line"] = span.end_line;
    return d;
}

py::list diags_to_list(const Diagnostics& diags) {
    py::list out;
    for (const auto& diag : diags) {
        py::dict d;
        d["severity"] = diag.severity == Severity::error ? "error" : "warning";
        d["message"] = diag.message;
        d["span"] = span_to_dict(diag.span);
        out.append(d);
    }
    return out;
}

py::dict parse_py(const std::string& text, const std::string& path,
                  bool lenient_from) {
    ParseOptions opts;
    opts.lenient_from = lenient_from;
    DockerfileAst ast = parse_dockerfile(sanitize_utf8(text), path, opts);
    py::dict result;
    result["valid"] = ast.valid;
    py::list instructions;
    for (const auto& inst : ast.instructions) {
        py::dict i;
        i["keyword"] = inst.keyword;
        i["args"] = inst.raw_args;
        i["span"] = span_to_dict(inst.span);
        instructions.append(i);
    }
    result["instructions"] = instructions;
    result["dropped_lines"] = static_cast<int>(ast.dropped.size());
    result["diagnostics"] = diags_to_list(ast.parse_diagnostics);
    return result;
}

py::list extract_py(const std::string& text, const std::string& path,
                    bool lenient_from) {
    ParseOptions opts;
    opts.lenient_from = lenient_from;
    DockerfileAst ast = parse_dockerfile(sanitize_utf8(text), path, opts);
    VarEnv env = build_env(ast);
    ExtractionResult extraction = extract_urls(ast, env);
    py::list out;
    for (const auto& url : extraction.urls) {
        py::dict u;
        u["url"] = url.url;
        u["source_kind"] = std::string(to_string(url.kind));
        u["line"] = url.span.start_line;
        u["fully_resolved"] = url.fully_resolved;
        u["variables"] = url.var_names;
        out.append(u);
    }
    return out;
}

py::object match_py(const std::string& url) {
    auto ref = match_github_url(url);
    if (!ref) return py::none();
    py::dict d;
    d["package"] = ref->identity.full();
    d["tag"] = ref->tag;
    d["pattern"] = std::string(to_string(ref->pattern));
    if (ref->asset_file)
        d["asset_file"] = *ref->asset_file;
    else
        d["asset_file"] = py::none();
    return d;
}

std::vector<std::string> version_sort_py(std::vector<std::string> tags) {
    std::sort(tags.begin(), tags.end(), version_less);
    return tags;
}

RunConfig config_from_kwargs(const py::kwargs& kwargs) {
    RunConfig config;
    for (const auto& item : kwargs) {
        std::string key = py::cast<std::string>(item.first);
        if (key == "corpus")
            config.corpus_dir = py::cast<std::string>(item.second);
        else if (key == "registry_fixture")
            config.registry_fixture = py::cast<std::string>(item.second);
        else if (key == "live")
            config.live = py::cast<bool>(item.second);
        else if (key == "token")
            config.token = py::cast<std::string>(item.second);
        else if (key == "cutoff") {
            std::string text = py::cast<std::string>(item.second);
            auto parsed = parse_date(text);
            if (!parsed)
                throw py::value_error("cutoff expects YYYY-MM-DD");
            config.cutoff = parsed;
            config.cutoff_text = text;
        } else if (key == "out")
            config.output_dir = py::cast<std::string>(item.second);
        else if (key == "cache_dir")
            config.cache_dir = py::cast<std::string>(item.second);
        else if (key == "advisories")
            config.advisories_path = py::cast<std::string>(item.second);
        else if (key == "lenient_from")
            config.lenient_from = py::cast<bool>(item.second);
        else if (key == "keep_unresolved")
            config.keep_unresolved = py::cast<bool>(item.second);
        else if (key == "jobs")
            config.jobs = py::cast<int>(item.second);
        else
            throw py::value_error("unknown option: " + key);
    }
    return config;
}

py::dict stage_result_to_dict(const StageResult& result) {
    py::dict d;
    d["exit_code"] = result.exit_code;
    d["diagnostics"] = diags_to_list(result.diagnostics);
    return d;
}

} // namespace

PYBIND11_MODULE(_dockmeta, m) {
    m.doc() = "Dockerfile version-pin mining and update recommendation";

    m.def("parse_dockerfile", &parse_py, py::arg("text"),
          py::arg("path") = "Dockerfile", py::arg("lenient_from") = false,
          "Parse Dockerfile text into an instruction list");
    m.def("extract_urls", &extract_py, py::arg("text"),
          py::arg("path") = "Dockerfile", py::arg("lenient_from") = false,
          "Extract download URLs with variables substituted");
    m.def("match_github_url", &match_py, py::arg("url"),
          "Match a URL against the release and archive download patterns");
    m.def("version_sort", &version_sort_py, py::arg("tags"),
          "Sort tags in version order (numeric runs compare numerically)");
    m.def("unified_diff", &make_unified_diff, py::arg("path"),
          py::arg("old_text"), py::arg("new_text"),
          "Unified diff between two versions of one file");

    m.def(
        "scan",
        [](const py::kwargs& kwargs) {
            return stage_result_to_dict(run_scan(config_from_kwargs(kwargs)));
        },
        "Mine a corpus into artifacts; same options as the CLI");
    m.def(
        "classify",
        [](const py::kwargs& kwargs) {
            return stage_result_to_dict(
                run_classify(config_from_kwargs(kwargs)));
        },
        "Classify Dockerfile histories from scan artifacts");
    m.def(
        "groups",
        [](const py::kwargs& kwargs) {
            return stage_result_to_dict(run_groups(config_from_kwargs(kwargs)));
        },
        "Build shared package groups from artifacts");
    m.def(
        "recommend",
        [](const py::kwargs& kwargs) {
            return stage_result_to_dict(
                run_recommend(config_from_kwargs(kwargs)));
        },
        "Plan version-bump patches from artifacts");
}
