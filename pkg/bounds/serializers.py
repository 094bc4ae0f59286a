# bounds/serializers.py
import math

from rest_framework import serializers

from .domain import BoundResult, BoundSide, Method, VariableSpec


def finite(value):
    if not math.isfinite(value):
        raise serializers.ValidationError('Value must be finite.')


class ExtendedFloatField(serializers.FloatField):
    """A float field that also reads back the infinities the renderers emit."""

    def to_internal_value(self, data):
        try:
            value = float(data)
        except (TypeError, ValueError, OverflowError):
            return super().to_internal_value(data)
        if math.isinf(value):
            return value
        return super().to_internal_value(data)


class VariableSpecSerializer(serializers.Serializer):
    """One row of the ``mu,sigma,bound,side`` schema."""

    mu = serializers.FloatField(validators=[finite])
    sigma = serializers.FloatField(min_value=0, validators=[finite])
    bound = serializers.FloatField(source='bound_value', validators=[finite])
    side = serializers.ChoiceField(source='bound_side', choices=BoundSide.choices)

    def validate(self, attrs):
        side = BoundSide(attrs['bound_side'])
        if side is BoundSide.CEILING and attrs['bound_value'] < attrs['mu']:
            raise serializers.ValidationError({'bound': 'A ceiling cannot lie below the mean.'})
        if side is BoundSide.FLOOR and attrs['bound_value'] > attrs['mu']:
            raise serializers.ValidationError({'bound': 'A floor cannot lie above the mean.'})
        return attrs

    def create(self, validated_data):
        return VariableSpec(**validated_data)


class BoundResultSerializer(serializers.Serializer):
    method = serializers.ChoiceField(choices=Method.choices)
    log_probability = ExtendedFloatField()
    probability = serializers.FloatField(min_value=0, max_value=1)
    raw_log_probability = ExtendedFloatField()
    degenerate = serializers.BooleanField(default=False)

    def get_fields(self):
        fields = super().get_fields()
        # "lambda" is a keyword, so the column is declared here
        fields['lambda'] = serializers.FloatField(source='lambda_', allow_null=True, required=False)
        return fields

    def create(self, validated_data):
        return BoundResult(**validated_data)
