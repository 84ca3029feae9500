#include <fstream>
#include <istream>
#include <sstream>

#include "semcap/error.hpp"
#include "semcap/selector.hpp"

namespace semcap {

namespace {

// Mirrors data/stopwords_en.txt.
constexpr std::string_view kBundled = R"(# Common English words ignored while culling candidate captions.
# One token per line; lines starting with '#' are comments.
the
of
and
to
a
in
is
that
for
it
as
was
with
be
by
on
not
he
i
this
are
or
his
from
at
which
but
have
an
had
they
you
were
their
one
all
we
can
her
has
there
been
if
more
when
will
would
who
so
no
she
other
its
may
these
what
them
than
some
him
time
into
only
do
up
out
two
first
my
about
new
also
any
our
could
me
then
like
such
most
over
should
did
many
your
made
through
those
now
well
even
where
after
just
said
how
very
because
each
way
)";

}  // namespace

std::string_view bundled_stopwords_text() noexcept { return kBundled; }

StopwordList::StopwordList(std::initializer_list<std::string_view> words) {
  for (auto w : words) insert(w);
}

void StopwordList::insert(std::string_view word) {
  auto tokens = tokenize(word);
  if (tokens.size() != 1) {
    throw Error("stopword \"" + std::string(word) + "\" is not a single token");
  }
  words_.insert(std::move(tokens.front()));
}

bool StopwordList::contains(std::string_view token) const { return words_.find(token) != words_.end(); }

StopwordList StopwordList::parse(std::istream& in) {
  StopwordList list;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.front() == '#') continue;
    auto tokens = tokenize(text);
    if (tokens.empty() && text.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (tokens.size() != 1) {
      throw ParseError("expected exactly one token, got " + std::to_string(tokens.size()), line);
    }
    list.words_.insert(std::move(tokens.front()));
  }
  return list;
}

StopwordList StopwordList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword file " + path);
  return parse(in);
}

const StopwordList& StopwordList::bundled() {
  static const StopwordList list = [] {
    std::istringstream in{std::string(kBundled)};
    return parse(in);
  }();
  return list;
}

}  // namespace semcap
