"""Versioned prompt templates for summarization and query preprocessing.

Both templates embed the same analytical instruction block so node summaries
and preprocessed queries land in a shared vocabulary; the version string is
part of every cache key, so editing a template invalidates cached outputs.
"""

PROMPT_VERSION = "v1"

SHARED_ANALYTICAL_INSTRUCTIONS = (
    "Describe intent, responsibilities, and collaborators in one or two plain "
    "sentences. Prefer domain vocabulary from the repository over generic "
    "programming terms. Never invent behavior that is not visible in the input."
)

SUMMARIZE_TEMPLATE = (
    "You summarize one {kind} from a software repository.\n"
    + SHARED_ANALYTICAL_INSTRUCTIONS
    + "\nName: {name}\nPath: {path}\nDocstring: {docstring}\nContent:\n{content}\n"
)

QUERY_TEMPLATE = (
    "You normalize a developer's issue text before semantic code search.\n"
    + SHARED_ANALYTICAL_INSTRUCTIONS
    + "\nRewrite the request as a compact description of the code that must "
    "change.\nIssue:\n{query}\n"
)
