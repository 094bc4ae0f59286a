# portfolio/tasks.py
import logging
from dataclasses import asdict

from celery import group, shared_task

from bounds.domain import PointFailure
from bounds.lambertw import DEFAULT_W_CONFIG, WConfig

from .allocation import allocate_point
from .serializers import AllocationResultSerializer, InvestmentSerializer, PointFailureSerializer

logger = logging.getLogger(__name__)


def _parse_investments(payload):
    serializer = InvestmentSerializer(data=payload, many=True)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


@shared_task
def allocation_point_task(investments, index, tau, w_cfg):
    """
    Allocate the budget at one target of a sweep.

    Arguments and the return value are plain JSON: the investments as
    serializer rows, and ``{'ok': ..., 'record': ...}`` back.
    """
    outcome = allocate_point(_parse_investments(investments), index, tau, WConfig(**w_cfg))
    if isinstance(outcome, PointFailure):
        return {'ok': False, 'record': dict(PointFailureSerializer(outcome).data)}
    return {'ok': True, 'record': dict(AllocationResultSerializer(outcome).data)}


def parallel_allocation_sweep(investments, tau_grid, w_cfg=DEFAULT_W_CONFIG):
    """``allocation_sweep`` fanned out as a Celery group; results keep grid order."""
    tau_grid = list(tau_grid)
    payload = [dict(row) for row in InvestmentSerializer(list(investments), many=True).data]
    job = group(
        allocation_point_task.s(payload, index, tau, asdict(w_cfg))
        for index, tau in enumerate(tau_grid)
    )
    logger.info(f"Dispatching {len(tau_grid)} allocation points")
    outcomes = [result.get() for result in job.apply_async().results] if tau_grid else []

    results = []
    for outcome in outcomes:
        serializer_class = AllocationResultSerializer if outcome['ok'] else PointFailureSerializer
        serializer = serializer_class(data=outcome['record'])
        serializer.is_valid(raise_exception=True)
        results.append(serializer.save())
    return results
