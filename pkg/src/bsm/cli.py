"""Thin-client CLI for the engine service.

Every subcommand speaks the HTTP API. By default the app is mounted
in-process (no server needed); pass --server-url to talk to a running
service instead. Exit code is 0 iff no fatal error -- per-sample failures
are counts in the manifest, not a nonzero exit.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Optional

import httpx


def _add_backend_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=["mock", "remote"], default="mock")
    parser.add_argument("--model-id", default="mock-model")
    parser.add_argument("--endpoint-url", default=None, help="remote backend base URL")
    parser.add_argument("--mock-script", default=None, help="JSON script for the mock backend")
    parser.add_argument("--cache-dir", default=None, help="completion cache directory")


def _add_common_run_args(parser: argparse.ArgumentParser) -> None:
    _add_backend_args(parser)
    parser.add_argument("--output-dir", required=True)
    parser.add_argument("--parallelism", type=int, default=1)
    parser.add_argument("--limit", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0, dest="random_seed")
    parser.add_argument("--save-traces", action="store_true")


def _backend_spec(args: argparse.Namespace) -> dict:
    return {
        "kind": args.backend,
        "model_id": args.model_id,
        "endpoint_url": args.endpoint_url,
        "mock_script_path": args.mock_script,
        "cache_dir": args.cache_dir,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bsm",
        description="Branch-solve-merge LLM program engine (thin client).",
    )
    parser.add_argument(
        "--server-url",
        default=None,
        help="URL of a running service; default runs the app in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    judge = sub.add_parser("run-judge", help="judge a response-pair dataset")
    _add_common_run_args(judge)
    judge.add_argument("--questions", required=True)
    judge.add_argument("--responses", required=True)
    judge.add_argument("--humans", required=True)
    judge.add_argument(
        "--method",
        choices=[
            "bsm",
            "zeroshot_relative",
            "zeroshot_absolute",
            "plan_and_solve",
            "self_consistency",
            "bsm_sc",
        ],
        default="bsm",
    )
    judge.add_argument("--category", default=None, help="filter to one question category")
    judge.add_argument("--scale", choices=["1-5", "1-10"], default="1-5")
    judge.add_argument("--max-k", type=int, default=5)
    judge.add_argument("--merge", choices=["sum", "neural"], default="sum")
    judge.add_argument("--n-samples", type=int, default=5)
    judge.add_argument("--temperature", type=float, default=0.7)
    judge.add_argument("--share-branch-plan", action="store_true")
    judge.add_argument("--judge-model-id", default=None)

    story = sub.add_parser("run-storygen", help="generate constraint-checked stories")
    _add_common_run_args(story)
    story.add_argument("--concepts", required=True)
    story.add_argument(
        "--no-compare",
        action="store_true",
        help="skip the zero-shot comparison story and pairwise quality judgment",
    )

    report = sub.add_parser("report", help="re-render a finished run's report")
    report.add_argument("--run-dir", required=True)
    report.add_argument("--format", choices=["table", "records"], default="table")

    validate = sub.add_parser("validate-data", help="check dataset files")
    validate.add_argument("--task", choices=["judge", "storygen"], required=True)
    validate.add_argument("--questions", default=None)
    validate.add_argument("--responses", default=None)
    validate.add_argument("--humans", default=None)
    validate.add_argument("--concepts", default=None)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)

    return parser


async def _post(server_url: Optional[str], path: str, payload: dict) -> dict:
    if server_url:
        async with httpx.AsyncClient(base_url=server_url, timeout=None) as client:
            response = await client.post(path, json=payload)
            return _unwrap(response)
    from bsm.service.app import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://bsm.local", timeout=None
    ) as client:
        response = await client.post(path, json=payload)
        return _unwrap(response)


def _unwrap(response: httpx.Response) -> dict:
    if response.status_code >= 400:
        try:
            detail = response.json()
        except ValueError:
            detail = {"detail": response.text}
        raise RuntimeError(
            f"{detail.get('error_class', 'HTTPError')}: {detail.get('detail', response.text)}"
        )
    return response.json()


def _run_judge(args: argparse.Namespace) -> int:
    config = {
        "task": "judge",
        "output_dir": args.output_dir,
        "backend": _backend_spec(args),
        "method": args.method,
        "questions_path": args.questions,
        "responses_path": args.responses,
        "humans_path": args.humans,
        "category": args.category,
        "limit": args.limit,
        "scale": [int(x) for x in args.scale.split("-")],
        "max_k": args.max_k,
        "merge": args.merge,
        "n_samples": args.n_samples,
        "temperature": args.temperature,
        "share_branch_plan": args.share_branch_plan,
        "parallelism": args.parallelism,
        "random_seed": args.random_seed,
        "judge_model_id": args.judge_model_id,
        "save_traces": args.save_traces,
    }
    body = asyncio.run(_post(args.server_url, "/runs/judge", config))
    rendered = asyncio.run(
        _post(args.server_url, "/reports/render", {"manifest": body["manifest"], "format": "table"})
    )
    print(rendered["text"])
    print(f"outputs written to {body['output_dir']}")
    return 0


def _run_storygen(args: argparse.Namespace) -> int:
    config = {
        "task": "storygen",
        "output_dir": args.output_dir,
        "backend": _backend_spec(args),
        "concepts_path": args.concepts,
        "limit": args.limit,
        "parallelism": args.parallelism,
        "random_seed": args.random_seed,
        "compare_zeroshot": not args.no_compare,
        "save_traces": args.save_traces,
    }
    body = asyncio.run(_post(args.server_url, "/runs/storygen", config))
    rendered = asyncio.run(
        _post(args.server_url, "/reports/render", {"manifest": body["manifest"], "format": "table"})
    )
    print(rendered["text"])
    print(f"outputs written to {body['output_dir']}")
    return 0


def _report(args: argparse.Namespace) -> int:
    manifest_path = Path(args.run_dir) / "manifest.json"
    if not manifest_path.exists():
        print(f"no manifest at {manifest_path}", file=sys.stderr)
        return 1
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    rendered = asyncio.run(
        _post(args.server_url, "/reports/render", {"manifest": manifest, "format": args.format})
    )
    print(rendered["text"])
    return 0


def _validate(args: argparse.Namespace) -> int:
    payload = {
        "task": args.task,
        "questions_path": args.questions,
        "responses_path": args.responses,
        "humans_path": args.humans,
        "concepts_path": args.concepts,
    }
    body = asyncio.run(_post(args.server_url, "/datasets/validate", payload))
    if body["valid"]:
        print("data valid")
        for name, value in body.get("counts", {}).items():
            print(f"  {name}: {value}")
        for category, count in sorted(body.get("category_counts", {}).items()):
            print(f"  category {category}: {count} samples")
        return 0
    for error in body.get("errors", []):
        print(f"invalid: {error}", file=sys.stderr)
    return 1


def _serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("bsm.service.app:app", host=args.host, port=args.port)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run-judge": _run_judge,
        "run-storygen": _run_storygen,
        "report": _report,
        "validate-data": _validate,
        "serve": _serve,
    }
    try:
        return handlers[args.command](args)
    except RuntimeError as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
