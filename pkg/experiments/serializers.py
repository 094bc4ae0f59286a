# experiments/serializers.py
from rest_framework import serializers

from bounds.domain import Method
from bounds.serializers import ExtendedFloatField

from .domain import ExperimentRecord, ValidationOutcome


class ExperimentRecordSerializer(serializers.Serializer):
    """Flat row: instance inputs followed by one ``log_<method>`` column per method."""

    instance_id = serializers.IntegerField(min_value=0)
    n = serializers.IntegerField(min_value=1)
    z = serializers.FloatField()
    t = serializers.FloatField()
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1)

    def get_fields(self):
        fields = super().get_fields()
        for method in Method:
            fields[f"log_{method.value}"] = ExtendedFloatField(
                source=f"log_bounds.{method.value}", max_value=0,
            )
        return fields

    def create(self, validated_data):
        return ExperimentRecord(**validated_data)


class ValidationOutcomeSerializer(serializers.Serializer):
    instance_id = serializers.IntegerField(min_value=0)
    n = serializers.IntegerField(min_value=1)
    z = serializers.FloatField()
    t = serializers.FloatField()
    method = serializers.ChoiceField(choices=Method.choices)
    bound = serializers.FloatField(min_value=0, max_value=1)
    estimate = serializers.FloatField(min_value=0, max_value=1)
    std_error = serializers.FloatField(min_value=0)
    applicable = serializers.BooleanField()
    violated = serializers.BooleanField(read_only=True)

    def create(self, validated_data):
        return ValidationOutcome(**validated_data)
