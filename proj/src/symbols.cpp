#include "liesym/symbols.hpp"

#include <algorithm>
#include <cctype>

namespace liesym {

namespace {
const std::set<std::string> kUnaryOps = {"exp", "log", "sin",  "cos",
                                         "tan", "sinh", "cosh", "tanh"};

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(c); });
}
} // namespace

void SymbolTable::set_variables(std::vector<std::string> xvar,
                                std::vector<std::string> uvar, int approxorder) {
    for (size_t i = 0; i < xvar.size(); ++i)
        for (size_t j = 0; j < xvar.size(); ++j)
            if (i != j && xvar[j].rfind(xvar[i], 0) == 0)
                throw Error("independent-variable identifiers must be prefix-free in "
                            "derivative tokens: '" + xvar[i] + "' is a prefix of '" +
                            xvar[j] + "'");
    for (const auto& u : uvar) {
        if (std::find(xvar.begin(), xvar.end(), u) != xvar.end())
            throw Error("identifier '" + u + "' declared both independent and dependent");
        if (approxorder >= 1) {
            for (const auto& v : uvar) {
                for (int k = 0; k <= approxorder; ++k) {
                    if (u == v + std::to_string(k))
                        throw Error("identifier '" + u + "' collides with the expanded "
                                    "dependent variable of '" + v + "'");
                }
            }
        }
    }
    xvar_ = std::move(xvar);
    uvar_ = std::move(uvar);
    approxorder_ = approxorder;
}

int SymbolTable::xvar_index(const std::string& name) const {
    auto it = std::find(xvar_.begin(), xvar_.end(), name);
    return it == xvar_.end() ? -1 : static_cast<int>(it - xvar_.begin());
}

int SymbolTable::uvar_index(const std::string& name) const {
    auto it = std::find(uvar_.begin(), uvar_.end(), name);
    return it == uvar_.end() ? -1 : static_cast<int>(it - uvar_.begin());
}

void SymbolTable::register_symbol(const std::string& name) {
    if (kernels_.count(name))
        throw Error("identifier '" + name + "' already declared as a function");
    if (collides_with_jet_name(name))
        throw Error("identifier '" + name + "' collides with a jet-variable name");
    symbols_.insert(name);
}

KernelPtr SymbolTable::register_kernel(const std::string& name, std::vector<Atom> deps) {
    if (symbols_.count(name))
        throw Error("identifier '" + name + "' already declared as a symbol");
    if (collides_with_jet_name(name))
        throw Error("identifier '" + name + "' collides with a jet-variable name");
    auto it = kernels_.find(name);
    if (it != kernels_.end())
        throw Error("function '" + name + "' already declared; dependency lists are "
                    "immutable after registration");
    auto data = std::make_shared<KernelData>();
    data->name = name;
    data->deps = std::move(deps);
    kernels_.emplace(name, data);
    return kernels_.at(name);
}

KernelPtr SymbolTable::kernel(const std::string& name) const {
    auto it = kernels_.find(name);
    if (it == kernels_.end()) throw Error("unknown function '" + name + "'");
    return it->second;
}

std::vector<std::string> SymbolTable::kernel_names() const {
    std::vector<std::string> out;
    out.reserve(kernels_.size());
    for (const auto& [n, k] : kernels_) out.push_back(n);
    return out;
}

Atom SymbolTable::jet(int dep_index, std::vector<int> index, int pert) const {
    if (dep_index < 0 || dep_index >= static_cast<int>(uvar_.size()))
        throw Error("dependent-variable index out of range");
    std::sort(index.begin(), index.end());
    auto data = std::make_shared<JetData>();
    data->dep = uvar_[dep_index];
    data->dep_index = dep_index;
    data->pert = pert;
    data->index = std::move(index);
    data->index_names.reserve(data->index.size());
    for (int i : data->index) {
        if (i < 0 || i >= static_cast<int>(xvar_.size()))
            throw Error("independent-variable index out of range");
        data->index_names.push_back(xvar_[i]);
    }
    return Atom::jet_var(data);
}

Atom SymbolTable::jet_extend(const Atom& jet_atom, int direction) const {
    if (jet_atom.kind != AtomKind::Jet) throw Error("jet_extend on a non-jet atom");
    std::vector<int> idx = jet_atom.jet->index;
    idx.push_back(direction);
    return jet(jet_atom.jet->dep_index, std::move(idx), jet_atom.jet->pert);
}

bool SymbolTable::parse_dep_head(const std::string& head, int& dep_index,
                                 int& pert) const {
    int di = uvar_index(head);
    if (di >= 0) {
        dep_index = di;
        pert = -1;
        return true;
    }
    if (approxorder_ >= 1) {
        for (size_t i = 0; i < uvar_.size(); ++i) {
            const std::string& u = uvar_[i];
            if (head.size() > u.size() && head.rfind(u, 0) == 0 &&
                all_digits(head.substr(u.size()))) {
                int k = std::stoi(head.substr(u.size()));
                if (k <= approxorder_) {
                    dep_index = static_cast<int>(i);
                    pert = k;
                    return true;
                }
            }
        }
    }
    return false;
}

bool SymbolTable::parse_index_tail(const std::string& tail, std::vector<int>& out) const {
    out.clear();
    size_t pos = 0;
    while (pos < tail.size()) {
        bool matched = false;
        // xvar identifiers are prefix-free, so greedy matching is unambiguous
        for (size_t i = 0; i < xvar_.size(); ++i) {
            const std::string& x = xvar_[i];
            if (tail.compare(pos, x.size(), x) == 0) {
                out.push_back(static_cast<int>(i));
                pos += x.size();
                matched = true;
                break;
            }
        }
        if (!matched) return false;
    }
    return !out.empty();
}

bool SymbolTable::collides_with_jet_name(const std::string& name) const {
    auto us = name.find('_');
    if (us == std::string::npos || us == 0 || us + 1 >= name.size()) {
        int di, pert;
        return parse_dep_head(name, di, pert); // bare dependent variable
    }
    int di, pert;
    std::vector<int> idx;
    return parse_dep_head(name.substr(0, us), di, pert) &&
           parse_index_tail(name.substr(us + 1), idx);
}

bool SymbolTable::is_unary_op(const std::string& ident) const {
    return kUnaryOps.count(ident) != 0;
}

void SymbolTable::tag_family(const std::string& kernel_name, const std::string& family,
                             int level) {
    if (!kernels_.count(kernel_name))
        throw Error("tag_family on undeclared function '" + kernel_name + "'");
    family_of_[kernel_name] = {family, level};
    family_member_[{family, level}] = kernel_name;
}

std::optional<std::pair<std::string, int>> SymbolTable::family_of(
    const std::string& kernel_name) const {
    auto it = family_of_.find(kernel_name);
    if (it == family_of_.end()) return std::nullopt;
    return it->second;
}

KernelPtr SymbolTable::family_member(const std::string& family, int level) const {
    auto it = family_member_.find({family, level});
    if (it == family_member_.end())
        throw Error("perturbation family '" + family + "' has no level " +
                    std::to_string(level));
    return kernel(it->second);
}

Atom SymbolTable::resolve(const std::string& ident) {
    if (ident == "epsilon") return Atom::symbol(ident);
    if (xvar_index(ident) >= 0) return Atom::symbol(ident);
    {
        int di, pert;
        if (parse_dep_head(ident, di, pert)) return jet(di, {}, pert);
    }
    auto us = ident.find('_');
    if (us != std::string::npos && us > 0 && us + 1 < ident.size()) {
        int di, pert;
        std::vector<int> idx;
        if (parse_dep_head(ident.substr(0, us), di, pert) &&
            parse_index_tail(ident.substr(us + 1), idx))
            return jet(di, std::move(idx), pert);
    }
    if (auto it = kernels_.find(ident); it != kernels_.end())
        return Atom::kernel_ref(it->second);
    if (symbols_.count(ident)) return Atom::symbol(ident);
    if (ident.size() > 2 && ident.rfind("k_", 0) == 0 && all_digits(ident.substr(2))) {
        symbols_.insert(ident);
        return Atom::symbol(ident);
    }
    if (ident.size() > 2 && ident.rfind("f_", 0) == 0 && all_digits(ident.substr(2)))
        throw Error("reserved function '" + ident +
                    "' used without a 'depend' declaration");
    throw Error("unknown identifier '" + ident + "'");
}

} // namespace liesym
