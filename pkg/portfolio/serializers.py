# portfolio/serializers.py
from rest_framework import serializers

from bounds.domain import PointFailure
from bounds.serializers import ExtendedFloatField, finite

from .domain import AllocationResult, Investment


class InvestmentSerializer(serializers.Serializer):
    """One row of the ``name,mu,sigma,floor`` schema."""

    name = serializers.CharField(max_length=200)
    mu = serializers.FloatField(validators=[finite])
    sigma = serializers.FloatField(validators=[finite])
    floor = serializers.FloatField(validators=[finite])

    def validate_sigma(self, value):
        if not value > 0:
            raise serializers.ValidationError('Payoff deviation must be positive.')
        return value

    def validate(self, attrs):
        if attrs['floor'] > attrs['mu']:
            raise serializers.ValidationError({'floor': 'The floor cannot lie above the expected payoff.'})
        return attrs

    def create(self, validated_data):
        return Investment(**validated_data)


class AllocationResultSerializer(serializers.Serializer):
    tau = serializers.FloatField()
    alpha = serializers.ListField(source='weights', child=serializers.FloatField(min_value=0))
    phi_bound = serializers.FloatField(min_value=0, max_value=1)
    log_phi = ExtendedFloatField()

    def get_fields(self):
        fields = super().get_fields()
        fields['lambda'] = serializers.ListField(source='lambdas', child=serializers.FloatField(min_value=0))
        return fields

    def create(self, validated_data):
        return AllocationResult(
            tau=validated_data['tau'],
            weights=tuple(validated_data['weights']),
            lambdas=tuple(validated_data['lambdas']),
            phi_bound=validated_data['phi_bound'],
            log_phi=validated_data['log_phi'],
        )


class PointFailureSerializer(serializers.Serializer):
    index = serializers.IntegerField(min_value=0)
    value = serializers.FloatField()
    message = serializers.CharField()

    def create(self, validated_data):
        return PointFailure(**validated_data)
